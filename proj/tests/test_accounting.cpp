#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pfrost/accounting.hpp"
#include "pfrost/error.hpp"
#include "pfrost/model.hpp"

using namespace pfrost;

TEST_CASE("registry counts equal the closed-form recomputation for every preset") {
    for (const std::string& name : preset_names()) {
        const ModelConfig cfg = preset(name);
        const ParameterRegistry reg = TransformerModel::build_registry(cfg);
        const auto cf = oracles::closed_form_counts(cfg);
        CAPTURE(name);
        CHECK(reg.group_count(Group::EMB) == size_t(cf.emb));
        CHECK(reg.group_count(Group::ATT) == size_t(cf.att));
        CHECK(reg.group_count(Group::FFN) == size_t(cf.ffn));
        CHECK(reg.group_count(Group::OTHER) == size_t(cf.other));
        CHECK(reg.total_count() == size_t(cf.total()));
    }
}

TEST_CASE("budget invariants: partition and exact ratio") {
    const ParamBudget b = count_budget(preset("base"), FreezeSpec::parse("att.self,ffn"));
    size_t sum = 0;
    for (const auto& [g, n] : b.per_group) sum += n;
    CHECK(sum == b.total);
    CHECK(b.ratio == double(b.trainable) / double(b.total));
}

TEST_CASE("headline budget examples") {
    CHECK(std::abs(count_budget(preset("big"), FreezeSpec::parse("ffn")).ratio - 0.52) <= 0.02);
    CHECK(std::abs(count_budget(preset("big_att8"), FreezeSpec::parse("emb,ffn")).ratio - 0.06) <=
          0.01);
    const ParamBudget student = count_budget(preset("student"), FreezeSpec::parse("emb"));
    CHECK(std::abs(student.ratio - 0.51) <= 0.02);
    CHECK(std::abs(double(student.total) / 16.9e6 - 1.0) <= 0.02);
}

TEST_CASE("preset totals match the reference systems") {
    auto total = [](const char* name) {
        return double(count_budget(preset(name), FreezeSpec{}).total);
    };
    CHECK(std::abs(total("big") / 213e6 - 1.0) <= 0.02);
    CHECK(std::abs(total("big_emb128") / 18e6 - 1.0) <= 0.05);
    CHECK(std::abs(total("big_ffn1024") / 137e6 - 1.0) <= 0.02);
    CHECK(std::abs(total("big_att8") / 147e6 - 1.0) <= 0.02);
    CHECK(std::abs(total("base") / 62.6e6 - 1.0) <= 0.02);
    CHECK(std::abs(total("student") / 16.9e6 - 1.0) <= 0.02);
    CHECK(std::abs(total("lm_base") / 38e6 - 1.0) <= 0.05);
}

TEST_CASE("full wide-model ratio column") {
    const std::vector<std::pair<std::string, double>> rows = {
        {"", 1.0},        {"emb", 0.82},     {"att", 0.64},    {"ffn", 0.52},
        {"emb,ffn", 0.35}, {"emb,att", 0.47}, {"att,ffn", 0.17},
    };
    std::vector<RatioEntry> grid;
    for (const auto& [freeze, expect] : rows) grid.push_back({"row", "big", freeze, expect});
    const RatioTable t = ratio_table(grid);
    CHECK(t.rows.size() == 7);
    CHECK(t.max_delta() <= 0.02);
}

TEST_CASE("language-model ratio column and total") {
    const std::vector<std::pair<std::string, double>> rows = {
        {"", 1.0},        {"emb", 0.53},     {"att", 0.81},    {"ffn", 0.64},
        {"emb,ffn", 0.18}, {"emb,att", 0.36}, {"att,ffn", 0.46},
    };
    std::vector<RatioEntry> grid;
    for (const auto& [freeze, expect] : rows) grid.push_back({"row", "lm_base", freeze, expect});
    const RatioTable t = ratio_table(grid);
    CHECK(t.max_delta() <= 0.02);
    CHECK(std::abs(double(t.rows[0].total) / 38e6 - 1.0) <= 0.05);
}

TEST_CASE("attention-subset ratio column") {
    const std::vector<std::pair<std::string, double>> rows = {
        {"ffn", 0.52},
        {"ffn,att.context", 0.41},  // self attention trainable
        {"ffn,att.self", 0.29},     // context only
        {"ffn,att.dec", 0.29},      // encoder attention only
        {"ffn,att.enc", 0.41},      // decoder attention only
    };
    std::vector<RatioEntry> grid;
    for (const auto& [freeze, expect] : rows) grid.push_back({"row", "big", freeze, expect});
    CHECK(ratio_table(grid).max_delta() <= 0.02);
}

TEST_CASE("half-width model ratio column") {
    const std::vector<std::pair<std::string, double>> rows = {
        {"", 1.0},         {"emb", 0.71},     {"att", 0.70},    {"ffn", 0.60},
        {"emb,ffn", 0.30}, {"emb,att", 0.40}, {"att,ffn", 0.30},
    };
    std::vector<RatioEntry> grid;
    for (const auto& [freeze, expect] : rows) grid.push_back({"row", "base", freeze, expect});
    CHECK(ratio_table(grid).max_delta() <= 0.02);
}

TEST_CASE("empty grid renders an empty table") {
    const RatioTable t = ratio_table({});
    CHECK(t.rows.empty());
    CHECK(t.max_delta() == 0.0);
    CHECK(t.to_csv() == "label,preset,freeze,total,trainable,ratio,expected,delta\n");
}

TEST_CASE("freezing a disjoint union never beats either part") {
    const ModelConfig cfg = preset("base");
    const double a = count_budget(cfg, FreezeSpec::parse("emb")).ratio;
    const double b = count_budget(cfg, FreezeSpec::parse("ffn.dec")).ratio;
    const double both = count_budget(cfg, FreezeSpec::parse("emb,ffn.dec")).ratio;
    CHECK(both <= std::min(a, b));
}

TEST_CASE("no freezing is exactly one; freezing the whole taxonomy is under a percent") {
    for (const std::string& name : preset_names()) {
        CAPTURE(name);
        CHECK(count_budget(preset(name), FreezeSpec{}).ratio == 1.0);
        const bool lm = preset(name).mode == Mode::language_model;
        (void)lm;
        CHECK(count_budget(preset(name), FreezeSpec::parse("emb,att,ffn")).ratio < 0.01);
    }
}

TEST_CASE("ratio table renders csv and aligned text") {
    const RatioTable t = ratio_table({{"r1", "big", "emb", 0.82}});
    const std::string csv = t.to_csv();
    CHECK(csv.find("r1,big,\"emb\"") != std::string::npos);
    const std::string text = t.to_text();
    CHECK(text.find("r1") != std::string::npos);
    CHECK(text.find("0.8") != std::string::npos);
}

TEST_CASE("unknown preset names raise config errors") {
    CHECK_THROWS_AS(preset("gigantic"), ConfigError);
}
