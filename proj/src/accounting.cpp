#include "pfrost/accounting.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "pfrost/error.hpp"
#include "pfrost/model.hpp"

namespace pfrost {

ParamBudget count_budget(const ModelConfig& cfg, const FreezeSpec& spec) {
    ParameterRegistry reg = TransformerModel::build_registry(cfg);
    ParamBudget b;
    if (!spec.empty()) {
        const auto resolved = resolve_selectors(reg, spec);
        // Budgets report the selection as frozen regardless of a deferred
        // freeze epoch; the ratio columns describe the end state.
        for (size_t i = 0; i < spec.selectors.size(); ++i) {
            size_t n = 0;
            for (const std::string& name : resolved[i]) {
                reg.at(name).set_trainable(false);
                n += reg.at(name).numel();
            }
            b.per_selector[spec.selectors[i].str()] = n;
        }
    }
    for (const Parameter& p : reg.params()) b.per_group[p.tag.group] += p.numel();
    b.total = reg.total_count();
    b.trainable = reg.trainable_count();
    b.ratio = b.total == 0 ? 1.0
                           : static_cast<double>(b.trainable) / static_cast<double>(b.total);
    return b;
}

std::string RatioTable::to_csv() const {
    std::ostringstream os;
    os << "label,preset,freeze,total,trainable,ratio,expected,delta\n";
    for (const RatioRow& r : rows) {
        os << r.label << "," << r.preset << ",\"" << r.freeze << "\"," << r.total << ","
           << r.trainable << "," << std::setprecision(6) << std::fixed << r.ratio << ",";
        if (r.expected) os << std::setprecision(4) << *r.expected;
        os << ",";
        if (r.delta) os << std::setprecision(6) << *r.delta;
        os << "\n";
    }
    return os.str();
}

std::string RatioTable::to_text() const {
    std::ostringstream os;
    os << std::left << std::setw(16) << "label" << std::setw(14) << "preset"
       << std::setw(22) << "freeze" << std::right << std::setw(12) << "total"
       << std::setw(12) << "trainable" << std::setw(9) << "ratio" << std::setw(10)
       << "expected" << std::setw(9) << "|delta|" << "\n";
    for (const RatioRow& r : rows) {
        os << std::left << std::setw(16) << r.label << std::setw(14) << r.preset
           << std::setw(22) << (r.freeze.empty() ? "-" : r.freeze) << std::right
           << std::setw(12) << r.total << std::setw(12) << r.trainable << std::setw(9)
           << std::fixed << std::setprecision(3) << r.ratio;
        if (r.expected) {
            os << std::setw(10) << std::setprecision(3) << *r.expected << std::setw(9)
               << std::setprecision(4) << *r.delta;
        } else {
            os << std::setw(10) << "-" << std::setw(9) << "-";
        }
        os << "\n";
    }
    return os.str();
}

double RatioTable::max_delta() const {
    double m = 0.0;
    for (const RatioRow& r : rows) {
        if (r.delta) m = std::max(m, *r.delta);
    }
    return m;
}

RatioTable ratio_table(const std::vector<RatioEntry>& grid) {
    RatioTable table;
    for (const RatioEntry& e : grid) {
        const ModelConfig cfg = preset(e.preset);
        const ParamBudget b = count_budget(cfg, FreezeSpec::parse(e.freeze));
        RatioRow row;
        row.label = e.label;
        row.preset = e.preset;
        row.freeze = e.freeze;
        row.total = b.total;
        row.trainable = b.trainable;
        row.ratio = b.ratio;
        row.expected = e.expected;
        if (e.expected) row.delta = std::abs(b.ratio - *e.expected);
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace pfrost
