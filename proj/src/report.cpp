#include "lungphase/report.hpp"

#include "lungphase/errors.hpp"
#include "lungphase/io_util.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace lungphase {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr Category kCategories[kCategoryCount] = {Category::Inspiration, Category::Expiration, Category::Both};

// Round to 6 decimals so the JSON output does not depend on the last bits
// of floating-point summation order.
ordered_json num(double v) {
    double r = std::round(v * 1e6) / 1e6;
    if (r == 0.0) r = 0.0;
    return r;
}

ordered_json opt(const std::optional<double>& v) {
    return v ? num(*v) : ordered_json(nullptr);
}

ordered_json boxes_json(const BoxCounts& b) {
    ordered_json j;
    j["matches"] = b.matches;
    j["n_reference"] = b.n_a;
    j["n_hypothesis"] = b.n_b;
    j["agreement"] = num(b.agreement());
    j["recall_reference"] = opt(b.recall_a());
    j["recall_hypothesis"] = opt(b.recall_b());
    return j;
}

ordered_json confusion_json(const ConfusionMeasure& m) {
    ordered_json j;
    j["tp_s"] = num(m.tp_s);
    j["fp_s"] = num(m.fp_s);
    j["tn_s"] = num(m.tn_s);
    j["fn_s"] = num(m.fn_s);
    return j;
}

ordered_json kappa_json(const KappaResult& k) {
    ordered_json j;
    j["status"] = std::string(to_string(k.status));
    j["p_o"] = num(k.p_o);
    j["p_e"] = num(k.p_e);
    j["kappa"] = opt(k.kappa);
    j["ci_low"] = opt(k.ci_low);
    j["ci_high"] = opt(k.ci_high);
    j["ci_excludes_estimate"] = k.ci_excludes_estimate;
    j["interpretation"] = k.interpretation();
    j["n_permutations"] = k.n_permutations;
    j["n_bootstrap"] = k.n_bootstrap;
    j["n_degenerate_replicates"] = k.n_degenerate_replicates;
    j["seed"] = k.seed;
    return j;
}

std::string category_key(Category c) {
    switch (c) {
    case Category::Inspiration: return "inspiration";
    case Category::Expiration: return "expiration";
    case Category::Both: return "both";
    }
    return {};
}

std::string percent(double fraction) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << fraction * 100.0 << '%';
    return out.str();
}

std::string percent(const std::optional<double>& fraction) {
    return fraction ? percent(*fraction) : std::string("n/a");
}

std::string fixed3(const std::optional<double>& v) {
    return v ? format_fixed(*v, 3) : std::string("n/a");
}

// Left-aligned first column, right-aligned others, two spaces between.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        if (width.size() < row.size()) width.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == 0) {
                line += row[c] + std::string(width[c] - row[c].size(), ' ');
            } else {
                line += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
            }
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
    return out.str();
}

std::string hypothesis_row_label(const AgreementReport& r) {
    return r.hypothesis_label + " (" + r.reference_label + ")";
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& values) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

} // namespace

std::string comparison_label(const AgreementReport& report) {
    return report.reference_label + " vs " + report.hypothesis_label;
}

std::string report_json(const std::vector<AgreementReport>& reports, const PostprocessTrace* trace) {
    ordered_json root;
    root["comparisons"] = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json c;
        c["label"] = comparison_label(r);
        c["reference"] = r.reference_label;
        c["hypothesis"] = r.hypothesis_label;
        c["confusion_roles"] = r.conventional_roles ? "conventional" : "as_published";
        c["n_files"] = r.files.size();
        ordered_json cats;
        for (Category cat : kCategories) {
            const auto& cr = r.category(cat);
            ordered_json j;
            j["method1"] = boxes_json(cr.boxes);
            j["confusion"] = confusion_json(cr.confusion);
            j["sensitivity"] = opt(cr.rates.sensitivity);
            j["specificity"] = opt(cr.rates.specificity);
            j["n_sensitivity_undefined"] = cr.rates.n_sensitivity_undefined;
            j["n_specificity_undefined"] = cr.rates.n_specificity_undefined;
            j["kappa"] = kappa_json(cr.kappa);
            cats[category_key(cat)] = j;
        }
        c["categories"] = cats;
        ordered_json files = ordered_json::array();
        for (const auto& f : r.files) {
            ordered_json fj;
            fj["file"] = f.file_id;
            fj["duration_s"] = num(f.duration_s);
            for (Category cat : kCategories) {
                const auto i = static_cast<std::size_t>(cat);
                ordered_json j;
                j["method1"] = boxes_json(f.boxes[i]);
                j["confusion"] = confusion_json(f.confusion[i]);
                j["sensitivity"] = opt(f.rates[i].sensitivity);
                j["specificity"] = opt(f.rates[i].specificity);
                fj[category_key(cat)] = j;
            }
            files.push_back(fj);
        }
        c["files"] = files;
        root["comparisons"].push_back(c);
    }
    if (trace) {
        ordered_json t;
        t["n_pruned"] = trace->n_pruned;
        t["n_duplicates_removed"] = trace->n_duplicates_removed;
        t["n_overlaps_resolved"] = trace->n_overlaps_resolved;
        t["n_large_overlaps"] = trace->n_large_overlaps;
        root["postprocess_trace"] = t;
    }
    return root.dump(2) + "\n";
}

std::string method1_table(const std::vector<AgreementReport>& reports) {
    std::vector<std::vector<std::string>> rows{{"Agreement using boxes", "Inspiration", "Expiration", "Both phases"}};
    for (const auto& r : reports) {
        rows.push_back({comparison_label(r), percent(r.category(Category::Inspiration).boxes.agreement()),
                        percent(r.category(Category::Expiration).boxes.agreement()),
                        percent(r.category(Category::Both).boxes.agreement())});
    }
    return render_table(rows);
}

std::string screening_table(const std::vector<AgreementReport>& reports) {
    std::vector<std::vector<std::string>> rows{
        {"", "Sensitivity", "", "", "Specificity", "", ""},
        {"", "Inspiration", "Expiration", "Both phases", "Inspiration", "Expiration", "Both phases"}};
    std::vector<std::vector<std::optional<double>>> columns(6);
    for (const auto& r : reports) {
        std::vector<std::string> row{hypothesis_row_label(r)};
        for (int which = 0; which < 2; ++which) {
            for (std::size_t c = 0; c < kCategoryCount; ++c) {
                const auto& rates = r.categories[c].rates;
                const auto& v = which == 0 ? rates.sensitivity : rates.specificity;
                columns[which * 3 + c].push_back(v);
                row.push_back(percent(v));
            }
        }
        rows.push_back(std::move(row));
    }
    std::vector<std::string> avg{"Average"};
    for (const auto& col : columns) avg.push_back(percent(mean_defined(col)));
    rows.push_back(std::move(avg));
    return render_table(rows);
}

std::string kappa_table(const std::vector<AgreementReport>& reports) {
    std::vector<std::vector<std::string>> rows{{"Pseudo-kappa", "Category", "kappa", "95% CI", "Interpretation"}};
    for (const auto& r : reports) {
        for (Category cat : kCategories) {
            const auto& k = r.category(cat).kappa;
            std::string ci = "n/a";
            if (k.ci_low && k.ci_high) ci = "[" + fixed3(k.ci_low) + ", " + fixed3(k.ci_high) + "]";
            rows.push_back({comparison_label(r), std::string(display_name(cat)), fixed3(k.kappa), ci,
                            k.interpretation()});
        }
    }
    return render_table(rows);
}

std::string report_text(const std::vector<AgreementReport>& reports, const PostprocessTrace* trace) {
    std::ostringstream out;
    out << "Method 1: box agreement (same class, Jaccard > 0.5)\n\n" << method1_table(reports) << '\n';
    out << "Method 2: fraction of time\n\n" << screening_table(reports) << '\n' << kappa_table(reports);
    bool conventional = !reports.empty() && reports.front().conventional_roles;
    out << "\nConfusion roles: "
        << (conventional ? "conventional (FP = hypothesis-only time)" : "as published (FP = reference-only time)")
        << '\n';
    if (trace) {
        out << "Post-processing: pruned " << trace->n_pruned << ", duplicates removed "
            << trace->n_duplicates_removed << ", overlaps resolved " << trace->n_overlaps_resolved
            << " (" << trace->n_large_overlaps << " large)\n";
    }
    return out.str();
}

std::vector<KappaRow> kappa_rows(const std::vector<AgreementReport>& reports) {
    std::vector<KappaRow> rows;
    for (const auto& r : reports) {
        for (Category cat : kCategories) {
            const auto& k = r.category(cat).kappa;
            rows.push_back({comparison_label(r) + ": " + std::string(display_name(cat)), k.kappa, k.ci_low,
                            k.ci_high});
        }
    }
    return rows;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_number(const std::optional<double>& v) {
    return v ? format_shortest(*v) : std::string();
}

// Splits one CSV record starting at `pos`; advances past its line ending.
std::vector<std::string> read_record(std::string_view text, std::size_t& pos, std::size_t line_no) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    bool was_quoted = false;
    while (pos < text.size()) {
        const char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    fields.back() += '"';
                    ++pos;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += c;
            }
        } else if (c == '"' && fields.back().empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
            was_quoted = false;
        } else if (c == '\n') {
            ++pos;
            break;
        } else if (c != '\r') {
            fields.back() += c;
        }
        ++pos;
    }
    if (quoted) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unterminated quote");
    return fields;
}

std::optional<double> parse_number(const std::string& s, std::size_t line_no) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

} // namespace

std::string write_kappa_csv(const std::vector<KappaRow>& rows) {
    std::string out = "label,kappa,ci_low,ci_high\n";
    for (const auto& r : rows) {
        out += csv_field(r.label) + ',' + csv_number(r.kappa) + ',' + csv_number(r.ci_low) + ',' +
               csv_number(r.ci_high) + '\n';
    }
    return out;
}

std::vector<KappaRow> parse_kappa_csv(std::string_view text) {
    std::size_t pos = 0;
    std::size_t line_no = 1;
    const auto header = read_record(text, pos, line_no);
    if (header != std::vector<std::string>{"label", "kappa", "ci_low", "ci_high"}) {
        throw Error(ErrorCode::ParseError, "line 1: expected header label,kappa,ci_low,ci_high");
    }
    std::vector<KappaRow> rows;
    while (pos < text.size()) {
        ++line_no;
        const auto fields = read_record(text, pos, line_no);
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != 4) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 4 fields");
        }
        rows.push_back({fields[0], parse_number(fields[1], line_no), parse_number(fields[2], line_no),
                        parse_number(fields[3], line_no)});
    }
    return rows;
}

} // namespace lungphase
