#pragma once

#include "lungphase/agreement.hpp"
#include "lungphase/postprocess.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lungphase {

// Full structured report for one or more comparisons, pretty-printed JSON
// with a fixed key order. Undefined quantities are null.
std::string report_json(const std::vector<AgreementReport>& reports,
                        const PostprocessTrace* trace = nullptr);

// "<reference> vs <hypothesis>"
std::string comparison_label(const AgreementReport& report);

// Box agreement table: one row per comparison, columns Inspiration,
// Expiration, Both phases.
std::string method1_table(const std::vector<AgreementReport>& reports);

// Sensitivity and specificity table: one row per comparison, labelled
// "<hypothesis> (<reference>)", three columns under each rate, followed by
// an Average row.
std::string screening_table(const std::vector<AgreementReport>& reports);

// Pseudo-kappa with percentile CI and interpretation per comparison and category.
std::string kappa_table(const std::vector<AgreementReport>& reports);

// All three tables plus the confusion convention in use.
std::string report_text(const std::vector<AgreementReport>& reports,
                        const PostprocessTrace* trace = nullptr);

struct KappaRow {
    std::string label;
    std::optional<double> kappa;
    std::optional<double> ci_low;
    std::optional<double> ci_high;

    bool operator==(const KappaRow&) const = default;
};

// Rows labelled "<reference> vs <hypothesis>: <category>", comparisons in
// the given order, categories Inspiration, Expiration, Both phases.
std::vector<KappaRow> kappa_rows(const std::vector<AgreementReport>& reports);

// Header "label,kappa,ci_low,ci_high"; undefined numbers are empty fields;
// labels quoted when they contain a comma, quote or newline. Numbers use the
// shortest round-tripping form, so parse(write(rows)) == rows.
std::string write_kappa_csv(const std::vector<KappaRow>& rows);
std::vector<KappaRow> parse_kappa_csv(std::string_view text);

} // namespace lungphase
