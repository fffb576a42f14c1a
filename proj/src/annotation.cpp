#include "lungphase/annotation.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>
#include <sstream>

namespace lungphase {

namespace fs = std::filesystem;

namespace {

constexpr double kTimeTolerance = 1e-9;

void check_overlaps(const std::vector<PhaseBox>& sorted, ErrorCode same_class_error,
                    Warnings* warnings) {
    // Latest end seen so far per class, and overall for the cross-class check.
    std::optional<PhaseBox> last[2];
    std::optional<PhaseBox> last_any;
    for (const auto& box : sorted) {
        auto& prev = last[static_cast<int>(box.phase)];
        if (prev && box.start_s < prev->end_s - kTimeTolerance) {
            throw Error(same_class_error,
                        std::string(to_string(box.phase)) + " boxes overlap at " +
                            format_shortest(box.start_s) + " s (previous ends " +
                            format_shortest(prev->end_s) + " s)");
        }
        if (warnings && last_any && last_any->phase != box.phase &&
            box.start_s < last_any->end_s - kTimeTolerance) {
            warnings->push_back("inspiration and expiration overlap at " +
                                format_shortest(box.start_s) + " s");
        }
        if (!prev || box.end_s > prev->end_s) {
            prev = box;
        }
        if (!last_any || box.end_s > last_any->end_s) {
            last_any = box;
        }
    }
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Normalizes the input to UTF-8, honouring UTF-16 byte-order marks.
std::string to_utf8(std::string_view raw) {
    auto byte = [&](std::size_t i) { return static_cast<unsigned char>(raw[i]); };
    if (raw.size() >= 3 && byte(0) == 0xEF && byte(1) == 0xBB && byte(2) == 0xBF) {
        return std::string(raw.substr(3));
    }
    const bool le = raw.size() >= 2 && byte(0) == 0xFF && byte(1) == 0xFE;
    const bool be = raw.size() >= 2 && byte(0) == 0xFE && byte(1) == 0xFF;
    if (!le && !be) {
        return std::string(raw);
    }
    std::string out;
    out.reserve(raw.size() / 2);
    auto unit = [&](std::size_t i) -> std::uint32_t {
        return le ? (byte(i) | (byte(i + 1) << 8)) : ((byte(i) << 8) | byte(i + 1));
    };
    for (std::size_t i = 2; i + 1 < raw.size(); i += 2) {
        std::uint32_t cp = unit(i);
        if (cp >= 0xD800 && cp < 0xDC00 && i + 3 < raw.size()) {
            const std::uint32_t lo = unit(i + 2);
            if (lo >= 0xDC00 && lo < 0xE000) {
                cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                i += 2;
            }
        }
        append_utf8(out, cp);
    }
    return out;
}

struct Token {
    enum class Kind { Number, String, Flag } kind;
    std::string text;
    double number = 0.0;
    int line = 0;
};

// Keeps only the values of a text TextGrid: numbers, quoted strings and
// <flags>. Keys ("xmin =", "intervals [3]:") are skipped, which makes the
// long and short forms produce the same token stream.
std::vector<Token> tokenize_textgrid(std::string_view text) {
    std::vector<Token> tokens;
    int line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto malformed = [&](const std::string& what) {
        return Error(ErrorCode::MalformedTextGrid, "line " + std::to_string(line) + ": " + what);
    };
    while (i < n) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '!') {
            while (i < n && text[i] != '\n') ++i;
        } else if (c == '"') {
            Token tok{Token::Kind::String, {}, 0.0, line};
            ++i;
            for (;;) {
                if (i >= n) {
                    throw malformed("unterminated string");
                }
                if (text[i] == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        tok.text.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                if (text[i] == '\n') ++line;
                tok.text.push_back(text[i++]);
            }
            tokens.push_back(std::move(tok));
        } else if (c == '<') {
            const auto close = text.find('>', i);
            if (close == std::string_view::npos) {
                throw malformed("unterminated <flag>");
            }
            tokens.push_back({Token::Kind::Flag, std::string(text.substr(i + 1, close - i - 1)), 0.0, line});
            i = close + 1;
        } else if (c == '[') {
            const auto close = text.find(']', i);
            if (close == std::string_view::npos) {
                throw malformed("unterminated [index]");
            }
            i = close + 1;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            std::size_t start = c == '+' ? i + 1 : i;
            double value = 0.0;
            auto res = std::from_chars(text.data() + start, text.data() + n, value);
            if (res.ec != std::errc{}) {
                throw malformed("bad number near '" + std::string(text.substr(i, 12)) + "'");
            }
            tokens.push_back({Token::Kind::Number, std::string(text.substr(i, res.ptr - (text.data() + i))), value, line});
            i = static_cast<std::size_t>(res.ptr - text.data());
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' ||
                             text[i] == '?')) {
                ++i;
            }
        } else {
            ++i; // '=', ':' and other punctuation
        }
    }
    return tokens;
}

class TokenCursor {
public:
    explicit TokenCursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    const Token& next(Token::Kind kind, const char* what) {
        if (pos_ >= tokens_.size()) {
            throw Error(ErrorCode::MalformedTextGrid, std::string("unexpected end of file, expected ") + what);
        }
        const Token& tok = tokens_[pos_];
        if (tok.kind != kind) {
            throw Error(ErrorCode::MalformedTextGrid,
                        "line " + std::to_string(tok.line) + ": expected " + what + ", found '" + tok.text + "'");
        }
        ++pos_;
        return tok;
    }

    double number(const char* what) { return next(Token::Kind::Number, what).number; }
    const std::string& string(const char* what) { return next(Token::Kind::String, what).text; }

    std::size_t count(const char* what) {
        const Token& tok = next(Token::Kind::Number, what);
        if (tok.number < 0 || tok.number != static_cast<double>(static_cast<long long>(tok.number))) {
            throw Error(ErrorCode::MalformedTextGrid,
                        "line " + std::to_string(tok.line) + ": " + what + " is not a count");
        }
        return static_cast<std::size_t>(tok.number);
    }

    int line() const { return pos_ < tokens_.size() ? tokens_[pos_].line : (tokens_.empty() ? 0 : tokens_.back().line); }
    bool at_end() const { return pos_ >= tokens_.size(); }
    const Token* peek() const { return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr; }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

std::string quote_textgrid(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    return out + "\"";
}

struct TierInterval {
    double xmin;
    double xmax;
    std::string label;
};

struct Tier {
    std::string name;
    std::vector<TierInterval> intervals;
};

std::vector<Tier> layout_tiers(const Annotation& a) {
    std::vector<PhaseBox> boxes = a.boxes;
    sort_by_time(boxes);
    bool overlapping = false;
    for (std::size_t i = 1; i < boxes.size(); ++i) {
        if (boxes[i].start_s < boxes[i - 1].end_s) overlapping = true;
    }
    auto build = [&](std::string name, std::optional<PhaseClass> only) {
        Tier tier{std::move(name), {}};
        double cursor = 0.0;
        for (const auto& b : boxes) {
            if (only && b.phase != *only) continue;
            if (b.start_s > cursor) tier.intervals.push_back({cursor, b.start_s, ""});
            tier.intervals.push_back({b.start_s, b.end_s, std::string(to_string(b.phase))});
            cursor = b.end_s;
        }
        if (cursor < a.duration_s || tier.intervals.empty()) {
            tier.intervals.push_back({cursor, a.duration_s, ""});
        }
        return tier;
    };
    if (!overlapping) {
        return {build("phases", std::nullopt)};
    }
    return {build("inspiration", PhaseClass::Inspiration), build("expiration", PhaseClass::Expiration)};
}

} // namespace

void validate_annotation(const Annotation& annotation, Warnings* warnings) {
    if (!(annotation.duration_s > 0.0) || !std::isfinite(annotation.duration_s)) {
        throw Error(ErrorCode::InvariantViolation, "file '" + annotation.file_id + "' has non-positive duration");
    }
    for (std::size_t i = 0; i < annotation.boxes.size(); ++i) {
        try {
            validate_box(annotation.boxes[i], annotation.duration_s);
        } catch (const Error& e) {
            throw Error(ErrorCode::InvariantViolation, "file '" + annotation.file_id + "': " + e.what());
        }
        if (i > 0 && annotation.boxes[i].start_s < annotation.boxes[i - 1].start_s) {
            throw Error(ErrorCode::InvariantViolation, "file '" + annotation.file_id + "': boxes not sorted by start");
        }
    }
    check_overlaps(annotation.boxes, ErrorCode::InvariantViolation, warnings);
}

std::optional<PhaseClass> ClassMap::classify(std::string_view label) const {
    const std::string key = lower(trim(label));
    if (key.empty()) {
        return std::nullopt;
    }
    for (const auto& [prefix, phase] : prefixes) {
        if (key.starts_with(lower(prefix))) {
            return phase;
        }
    }
    if (strict) {
        throw Error(ErrorCode::UnknownLabel, "label '" + std::string(label) + "' is not mapped to a phase");
    }
    return std::nullopt;
}

Annotation parse_textgrid(std::string_view text, const ClassMap& class_map, std::string file_id,
                          Warnings* warnings) {
    TokenCursor cur(tokenize_textgrid(to_utf8(text)));
    const std::string& file_type = cur.string("file type");
    if (!file_type.starts_with("ooTextFile")) {
        throw Error(ErrorCode::MalformedTextGrid, "not a text TextGrid (file type '" + file_type + "')");
    }
    if (cur.string("object class") != "TextGrid") {
        throw Error(ErrorCode::MalformedTextGrid, "object class is not TextGrid");
    }
    const double xmin = cur.number("xmin");
    const double xmax = cur.number("xmax");
    if (!(xmax > xmin)) {
        throw Error(ErrorCode::MalformedTextGrid, "file xmax <= xmin");
    }
    std::size_t n_tiers = 0;
    if (const Token* t = cur.peek(); t && t->kind == Token::Kind::Flag) {
        const std::string flag = cur.next(Token::Kind::Flag, "tiers flag").text;
        if (flag == "exists") {
            n_tiers = cur.count("tier count");
        } else if (flag != "absent") {
            throw Error(ErrorCode::MalformedTextGrid, "unknown flag <" + flag + ">");
        }
    } else {
        n_tiers = cur.count("tier count");
    }

    Annotation a;
    a.file_id = std::move(file_id);
    a.duration_s = xmax - xmin;
    a.source = "textgrid";
    bool any_interval_tier = false;
    for (std::size_t t = 0; t < n_tiers; ++t) {
        const std::string tier_class = cur.string("tier class");
        const std::string tier_name = cur.string("tier name");
        const double tmin = cur.number("tier xmin");
        const double tmax = cur.number("tier xmax");
        if (tmin < xmin - kTimeTolerance || tmax > xmax + kTimeTolerance) {
            throw Error(ErrorCode::MalformedTextGrid, "tier '" + tier_name + "' exceeds the file's time domain");
        }
        const std::size_t n_items = cur.count("item count");
        if (tier_class == "IntervalTier") {
            any_interval_tier = true;
            for (std::size_t k = 0; k < n_items; ++k) {
                const int line = cur.line();
                const double start = cur.number("interval xmin");
                const double end = cur.number("interval xmax");
                const std::string label = cur.string("interval text");
                if (start < xmin - kTimeTolerance || end > xmax + kTimeTolerance) {
                    throw Error(ErrorCode::MalformedTextGrid,
                                "line " + std::to_string(line) + ": interval [" + format_shortest(start) + ", " +
                                    format_shortest(end) + "] outside file bounds");
                }
                if (!(end > start)) {
                    throw Error(ErrorCode::MalformedTextGrid,
                                "line " + std::to_string(line) + ": interval with xmax <= xmin");
                }
                if (auto phase = class_map.classify(label)) {
                    a.boxes.push_back({*phase, std::max(0.0, start - xmin),
                                       std::min(a.duration_s, end - xmin), 1.0});
                }
            }
        } else if (tier_class == "TextTier") {
            for (std::size_t k = 0; k < n_items; ++k) {
                cur.number("point time");
                cur.string("point mark");
            }
            if (warnings) {
                warnings->push_back("skipped point tier '" + tier_name + "'");
            }
        } else {
            throw Error(ErrorCode::MalformedTextGrid, "unknown tier class '" + tier_class + "'");
        }
    }
    if (!any_interval_tier) {
        throw Error(ErrorCode::MalformedTextGrid, "no IntervalTier present");
    }
    sort_by_time(a.boxes);
    check_overlaps(a.boxes, ErrorCode::OverlapWithinClass, warnings);
    return a;
}

Annotation load_textgrid(const fs::path& path, const ClassMap& class_map, Warnings* warnings) {
    return parse_textgrid(read_file_text(path), class_map, path.stem().string(), warnings);
}

std::string serialize_textgrid_long(const Annotation& annotation) {
    const auto tiers = layout_tiers(annotation);
    const std::string dur = format_shortest(annotation.duration_s);
    std::ostringstream out;
    out << "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n";
    out << "xmin = 0 \nxmax = " << dur << " \ntiers? <exists> \nsize = " << tiers.size() << " \nitem []: \n";
    for (std::size_t t = 0; t < tiers.size(); ++t) {
        out << "    item [" << t + 1 << "]:\n";
        out << "        class = \"IntervalTier\" \n";
        out << "        name = " << quote_textgrid(tiers[t].name) << " \n";
        out << "        xmin = 0 \n        xmax = " << dur << " \n";
        out << "        intervals: size = " << tiers[t].intervals.size() << " \n";
        for (std::size_t k = 0; k < tiers[t].intervals.size(); ++k) {
            const auto& iv = tiers[t].intervals[k];
            out << "        intervals [" << k + 1 << "]:\n";
            out << "            xmin = " << format_shortest(iv.xmin) << " \n";
            out << "            xmax = " << format_shortest(iv.xmax) << " \n";
            out << "            text = " << quote_textgrid(iv.label) << " \n";
        }
    }
    return out.str();
}

std::string serialize_textgrid_short(const Annotation& annotation) {
    const auto tiers = layout_tiers(annotation);
    const std::string dur = format_shortest(annotation.duration_s);
    std::ostringstream out;
    out << "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n";
    out << "0\n" << dur << "\n<exists>\n" << tiers.size() << "\n";
    for (const auto& tier : tiers) {
        out << "\"IntervalTier\"\n" << quote_textgrid(tier.name) << "\n0\n" << dur << "\n"
            << tier.intervals.size() << "\n";
        for (const auto& iv : tier.intervals) {
            out << format_shortest(iv.xmin) << "\n" << format_shortest(iv.xmax) << "\n"
                << quote_textgrid(iv.label) << "\n";
        }
    }
    return out.str();
}

std::string write_annotation_json(const Annotation& a) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"file\": " << nlohmann::json(a.file_id).dump() << ",\n";
    out << "  \"duration_s\": " << format_fixed(a.duration_s) << ",\n";
    out << "  \"source\": " << nlohmann::json(a.source).dump() << ",\n";
    out << "  \"boxes\": [";
    for (std::size_t i = 0; i < a.boxes.size(); ++i) {
        const auto& b = a.boxes[i];
        out << (i == 0 ? "\n" : ",\n");
        out << "    {\"class\": \"" << to_string(b.phase) << "\", \"start_s\": " << format_fixed(b.start_s)
            << ", \"end_s\": " << format_fixed(b.end_s) << ", \"confidence\": " << format_fixed(b.confidence)
            << "}";
    }
    out << (a.boxes.empty() ? "]\n" : "\n  ]\n");
    out << "}\n";
    return out.str();
}

Annotation read_annotation_json(std::string_view text, Warnings* warnings) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("annotation JSON: ") + e.what());
    }
    auto field = [&](const nlohmann::json& obj, const char* key, auto check, const char* type) -> const nlohmann::json& {
        if (!obj.is_object() || !obj.contains(key) || !check(obj.at(key))) {
            throw Error(ErrorCode::ParseError, std::string("annotation JSON: missing or non-") + type + " field '" + key + "'");
        }
        return obj.at(key);
    };
    auto is_string = [](const nlohmann::json& v) { return v.is_string(); };
    auto is_number = [](const nlohmann::json& v) { return v.is_number(); };
    auto is_array = [](const nlohmann::json& v) { return v.is_array(); };

    Annotation a;
    a.file_id = field(j, "file", is_string, "string").get<std::string>();
    a.duration_s = field(j, "duration_s", is_number, "number").get<double>();
    if (j.contains("source")) {
        a.source = field(j, "source", is_string, "string").get<std::string>();
    }
    for (const auto& item : field(j, "boxes", is_array, "array")) {
        const auto cls = field(item, "class", is_string, "string").get<std::string>();
        auto phase = parse_phase_class(cls);
        if (!phase) {
            throw Error(ErrorCode::InvariantViolation, "unknown class '" + cls + "' in '" + a.file_id + "'");
        }
        PhaseBox box{*phase, field(item, "start_s", is_number, "number").get<double>(),
                     field(item, "end_s", is_number, "number").get<double>(), 1.0};
        if (item.contains("confidence")) {
            box.confidence = field(item, "confidence", is_number, "number").get<double>();
        }
        a.boxes.push_back(box);
    }
    if (!std::is_sorted(a.boxes.begin(), a.boxes.end(),
                        [](const PhaseBox& x, const PhaseBox& y) { return x.start_s < y.start_s; })) {
        if (warnings) {
            warnings->push_back("boxes in '" + a.file_id + "' were out of order and have been sorted");
        }
    }
    sort_by_time(a.boxes);
    validate_annotation(a, warnings);
    return a;
}

Annotation load_annotation_json(const fs::path& path, Warnings* warnings) {
    return read_annotation_json(read_file_text(path), warnings);
}

std::vector<Annotation> load_annotation_corpus(const fs::path& path, const ClassMap& class_map,
                                               Warnings* warnings) {
    auto load_one = [&](const fs::path& file) -> std::optional<Annotation> {
        const std::string name = file.filename().string();
        if (file.extension() == ".TextGrid") {
            return load_textgrid(file, class_map, warnings);
        }
        if (file.extension() == ".json" && name != "manifest.json" && !name.ends_with(".spec.json")) {
            return load_annotation_json(file, warnings);
        }
        return std::nullopt;
    };

    std::vector<Annotation> corpus;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            if (auto a = load_one(f)) corpus.push_back(std::move(*a));
        }
    } else if (fs::is_regular_file(path)) {
        auto a = load_one(path);
        if (!a) {
            throw Error(ErrorCode::InvalidArgument, "'" + path.string() + "' is not an annotation file");
        }
        corpus.push_back(std::move(*a));
    } else {
        throw Error(ErrorCode::IoFailure, "'" + path.string() + "' does not exist");
    }
    std::sort(corpus.begin(), corpus.end(),
              [](const Annotation& x, const Annotation& y) { return x.file_id < y.file_id; });
    for (std::size_t i = 1; i < corpus.size(); ++i) {
        if (corpus[i].file_id == corpus[i - 1].file_id) {
            throw Error(ErrorCode::InvalidArgument, "duplicate file id '" + corpus[i].file_id + "'");
        }
    }
    return corpus;
}

CorpusPhaseCounts count_phases(const std::vector<Annotation>& corpus) {
    CorpusPhaseCounts counts;
    counts.n_files = corpus.size();
    for (const auto& a : corpus) {
        auto& per_source = counts.by_source[a.source];
        for (const auto& b : a.boxes) {
            auto& slot_total = b.phase == PhaseClass::Inspiration ? counts.total.inspiration : counts.total.expiration;
            auto& slot_source = b.phase == PhaseClass::Inspiration ? per_source.inspiration : per_source.expiration;
            ++slot_total;
            ++slot_source;
        }
    }
    return counts;
}

} // namespace lungphase
