#include "pfrost/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "pfrost/error.hpp"

namespace pfrost {

namespace fs = std::filesystem;

// ---- task spec --------------------------------------------------------------

std::string TaskSpec::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::mt_synthetic:
            os << "mt:" << to_string(mt.task) << " alphabet=" << mt.alphabet_size
               << " shift=" << mt.shift_k << " pairs=" << mt.n_pairs << " dev=" << mt.n_dev
               << " len=" << mt.len_lo << ".." << mt.len_hi << " data_seed=" << mt.seed;
            break;
        case Kind::lm_synthetic:
            os << "lm:synthetic lines=" << lm_lines << " words=" << lm_words
               << " dev=" << lm_dev_lines << " data_seed=" << lm_seed;
            break;
        case Kind::lm_file:
            os << "lm:file path=" << lm_path << " dev_lines=" << lm_dev_lines;
            break;
    }
    return os.str();
}

MtDataset build_mt_dataset(const TaskSpec& task) {
    if (task.kind != TaskSpec::Kind::mt_synthetic) {
        throw ConfigError("task is not a translation task");
    }
    return gen_synthetic_translation(task.mt);
}

LmDataset build_lm_dataset(const TaskSpec& task) {
    switch (task.kind) {
        case TaskSpec::Kind::lm_synthetic:
            return load_lm_corpus(gen_synthetic_text(task.lm_lines, task.lm_words, task.lm_seed),
                                  task.lm_dev_lines, task.lm_max_vocab);
        case TaskSpec::Kind::lm_file:
            return load_lm_corpus_file(task.lm_path, task.lm_dev_lines, task.lm_max_vocab);
        default:
            throw ConfigError("task is not a language-model task");
    }
}

// ---- grid parsing --------------------------------------------------------------

namespace {

// Splits a line into tokens; double quotes group characters (including
// spaces and commas) into one token. '#' starts a comment.
std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool has_cur = false;
    for (char c : line) {
        if (quoted) {
            if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            has_cur = true;
            continue;
        }
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r') {
            if (has_cur || !cur.empty()) {
                out.push_back(cur);
                cur.clear();
                has_cur = false;
            }
            continue;
        }
        cur += c;
    }
    if (has_cur || !cur.empty()) out.push_back(cur);
    return out;
}

struct KvArgs {
    std::vector<std::pair<std::string, std::string>> kv;
    std::vector<std::string> positional;

    static KvArgs from_tokens(const std::vector<std::string>& tokens, size_t start) {
        KvArgs a;
        for (size_t i = start; i < tokens.size(); ++i) {
            const auto eq = tokens[i].find('=');
            if (eq == std::string::npos) {
                a.positional.push_back(tokens[i]);
            } else {
                a.kv.emplace_back(tokens[i].substr(0, eq), tokens[i].substr(eq + 1));
            }
        }
        return a;
    }

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : kv) {
            if (k == key) return &v;
        }
        return nullptr;
    }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        const std::string* v = find(key);
        return v ? *v : fallback;
    }

    uint64_t get_u64(const std::string& key, uint64_t fallback) const {
        const std::string* v = find(key);
        return v ? std::stoull(*v) : fallback;
    }

    double get_double(const std::string& key, double fallback) const {
        const std::string* v = find(key);
        return v ? std::stod(*v) : fallback;
    }
};

void parse_len_range(const std::string& text, size_t& lo, size_t& hi) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        lo = hi = std::stoull(text);
        return;
    }
    lo = std::stoull(text.substr(0, dots));
    hi = std::stoull(text.substr(dots + 2));
}

TaskSpec parse_task_tokens(const std::vector<std::string>& tokens, size_t start) {
    TaskSpec task;
    if (tokens.size() <= start) throw ConfigError("task needs a type (mt|lm)");
    const KvArgs args = KvArgs::from_tokens(tokens, start + 1);
    const std::string& type = tokens[start];
    if (type == "mt") {
        task.kind = TaskSpec::Kind::mt_synthetic;
        task.mt.task = synthetic_task_from_string(args.get("kind", "copy"));
        task.mt.alphabet_size = args.get_u64("alphabet", 8);
        task.mt.shift_k = args.get_u64("shift", 1);
        task.mt.n_pairs = args.get_u64("pairs", 400);
        task.mt.n_dev = args.get_u64("dev", 48);
        task.mt.seed = args.get_u64("data_seed", 7);
        if (const std::string* l = args.find("len")) {
            parse_len_range(*l, task.mt.len_lo, task.mt.len_hi);
        }
    } else if (type == "lm") {
        const std::string source = args.get("source", "synthetic");
        if (source == "synthetic") {
            task.kind = TaskSpec::Kind::lm_synthetic;
            task.lm_lines = args.get_u64("lines", 600);
            task.lm_words = args.get_u64("words", 40);
            task.lm_seed = args.get_u64("data_seed", 11);
            task.lm_dev_lines = args.get_u64("dev", 60);
        } else {
            task.kind = TaskSpec::Kind::lm_file;
            task.lm_path = args.get("path");
            task.lm_dev_lines = args.get_u64("dev_lines", 200);
        }
        task.lm_max_vocab = args.get_u64("max_vocab", 512);
    } else {
        throw ConfigError("unknown task type '" + type + "'");
    }
    return task;
}

}  // namespace

TaskSpec parse_task_spec(const std::string& text) {
    const auto tokens = tokenize(text);
    return parse_task_tokens(tokens, 0);
}

GridSpec GridSpec::parse(const std::string& text, const std::string& name_hint) {
    GridSpec g;
    g.name = name_hint;
    // Desk-scale defaults; grids usually override.
    g.model.d_model = 64;
    g.model.d_ff = 256;
    g.model.n_heads = 2;
    g.model.n_enc_layers = 2;
    g.model.n_dec_layers = 2;
    g.model.max_len = 64;
    g.model.vocab_size = 0;  // filled in from the task data

    std::istringstream is(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        const std::string& head = tokens[0];
        const KvArgs args = KvArgs::from_tokens(tokens, 1);
        try {
            if (head == "name") {
                if (!args.positional.empty()) g.name = args.positional[0];
            } else if (head == "model") {
                g.model.d_model = args.get_u64("d_model", g.model.d_model);
                g.model.d_ff = args.get_u64("d_ff", g.model.d_ff);
                g.model.n_heads = args.get_u64("n_heads", g.model.n_heads);
                g.model.d_kq = args.get_u64("d_kq", g.model.d_kq);
                g.model.d_v = args.get_u64("d_v", g.model.d_v);
                g.model.n_enc_layers = args.get_u64("enc", g.model.n_enc_layers);
                g.model.n_dec_layers = args.get_u64("dec", g.model.n_dec_layers);
                g.model.vocab_size = args.get_u64("vocab", g.model.vocab_size);
                g.model.max_len = args.get_u64("max_len", g.model.max_len);
            } else if (head == "ratio_preset") {
                if (args.positional.empty()) throw ConfigError("ratio_preset needs a name");
                g.ratio_preset = args.positional[0];
            } else if (head == "task") {
                g.task = parse_task_tokens(tokens, 1);
            } else if (head == "train") {
                g.train.learning_rate = args.get_double("lr", g.train.learning_rate);
                g.train.batch_size = args.get_u64("batch", g.train.batch_size);
                g.train.max_epochs = args.get_u64("max_epochs", g.train.max_epochs);
                g.train.stall_patience_ppl = args.get_u64("patience_ppl", g.train.stall_patience_ppl);
                g.train.stall_patience_bleu =
                    args.get_u64("patience_bleu", g.train.stall_patience_bleu);
                g.train.eval_every = args.get_u64("eval_every", g.train.eval_every);
                g.train.decode_max_len = args.get_u64("decode_max_len", g.train.decode_max_len);
            } else if (head == "seeds") {
                g.seeds.clear();
                for (const std::string& s : args.positional) g.seeds.push_back(std::stoull(s));
            } else if (head == "row") {
                GridRow row;
                row.id = args.get("id");
                row.label = args.get("label", row.id);
                row.freeze = args.get("freeze");
                if (const std::string* e = args.find("expect_ratio")) {
                    row.expect_ratio = std::stod(*e);
                }
                if (row.id.empty()) throw ConfigError("row needs an id");
                g.rows.push_back(std::move(row));
            } else if (head == "trend") {
                // trend <metric> <row_a> <op> <row_b>
                if (tokens.size() != 5) {
                    throw ConfigError("trend syntax: trend <metric> <row> <|> <row>");
                }
                TrendAssert t;
                t.metric = tokens[1];
                t.row_a = tokens[2];
                t.dir = tokens[3] == "<" ? '<' : '>';
                t.row_b = tokens[4];
                if (t.metric != "bleu" && t.metric != "ppl") {
                    throw ConfigError("trend metric must be bleu or ppl");
                }
                g.trends.push_back(std::move(t));
            } else {
                throw ConfigError("unknown directive '" + head + "'");
            }
        } catch (const std::exception& e) {
            throw ConfigError("grid " + g.name + " line " + std::to_string(line_no) + ": " +
                              e.what());
        }
    }

    if (g.rows.empty() && g.trends.empty() && g.seeds.empty()) return g;  // empty grid
    if (g.seeds.empty()) throw ConfigError("grid " + g.name + ": seeds must be non-empty");
    std::set<std::string> ids;
    for (const GridRow& r : g.rows) {
        if (!ids.insert(r.id).second) {
            throw ConfigError("grid " + g.name + ": duplicate row id '" + r.id + "'");
        }
        FreezeSpec::parse(r.freeze);  // fail fast on bad selectors
    }
    for (const TrendAssert& t : g.trends) {
        if (!ids.count(t.row_a) || !ids.count(t.row_b)) {
            throw ConfigError("grid " + g.name + ": trend references unknown row");
        }
    }
    return g;
}

GridSpec GridSpec::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open grid file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), fs::path(path).stem().string());
}

// ---- report pieces ---------------------------------------------------------------

namespace {

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    if (n == 0) return std::nan("");
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string TrendResult::describe() const {
    std::ostringstream os;
    os << "median_" << spec.metric << "(" << spec.row_a << ") " << spec.dir << " median_"
       << spec.metric << "(" << spec.row_b << "): " << fmt(value_a, 3) << " vs "
       << fmt(value_b, 3) << " (margin " << fmt(margin, 3) << ") "
       << (pass ? "PASS" : "WARN");
    return os.str();
}

const RowSummary& GridReport::row(const std::string& id) const {
    for (const RowSummary& r : rows) {
        if (r.row.id == id) return r;
    }
    throw DataError("report: no row with id '" + id + "'");
}

double row_median(const GridReport& report, const std::string& row_id,
                  const std::string& metric) {
    const RowSummary& r = report.row(row_id);
    if (metric == "bleu") {
        if (!r.median_bleu) throw MetricError("row '" + row_id + "' has no BLEU metric");
        return *r.median_bleu;
    }
    if (metric == "ppl") return r.median_ppl;
    throw MetricError("unknown metric '" + metric + "'");
}

TrendResult assert_ordering(const GridReport& report, const std::string& row_a,
                            const std::string& row_b, const std::string& metric,
                            char dir) {
    TrendResult t;
    t.spec = {metric, row_a, row_b, dir};
    t.value_a = row_median(report, row_a, metric);
    t.value_b = row_median(report, row_b, metric);
    t.margin = dir == '>' ? t.value_a - t.value_b : t.value_b - t.value_a;
    // Strict inequality, except that a row always orders with itself.
    t.pass = row_a == row_b ? true : t.margin > 0.0;
    return t;
}

int GridReport::exit_code() const {
    if (!hard_failures.empty()) return 1;
    if (!warnings.empty()) return 2;
    return 0;
}

std::string GridReport::runs_csv() const {
    std::ostringstream os;
    os << "grid,row,label,freeze,seed,ratio,best_ppl,best_bleu,epochs_to_converge,"
          "epochs_run,steps,status\n";
    for (const RowSummary& r : rows) {
        for (size_t s = 0; s < r.per_seed.size(); ++s) {
            const RunOutcome& o = r.per_seed[s];
            os << grid_name << "," << r.row.id << "," << r.row.label << ",\"" << r.row.freeze
               << "\"," << seeds[s] << ",";
            if (o.ok) {
                os << fmt(o.record.ratio) << "," << fmt(o.record.best_ppl) << ",";
                if (o.record.best_bleu) os << fmt(*o.record.best_bleu);
                os << "," << o.record.epochs_to_converge << "," << o.record.epochs_run << ","
                   << o.record.steps << ",ok";
            } else {
                os << ",,,,,failed: " << o.error;
            }
            os << "\n";
        }
    }
    return os.str();
}

std::string GridReport::summary_csv() const {
    std::ostringstream os;
    os << "grid,row,label,freeze,preset_ratio,expect_ratio,ratio_delta,ratio_ok,"
          "median_bleu,median_ppl,failed\n";
    for (const RowSummary& r : rows) {
        os << grid_name << "," << r.row.id << "," << r.row.label << ",\"" << r.row.freeze
           << "\"," << fmt(r.preset_ratio) << ",";
        if (r.row.expect_ratio) os << fmt(*r.row.expect_ratio, 4);
        os << ",";
        if (r.ratio_delta) os << fmt(*r.ratio_delta);
        os << "," << (r.ratio_ok ? "yes" : "NO") << ",";
        if (r.median_bleu) os << fmt(*r.median_bleu, 3);
        os << "," << fmt(r.median_ppl, 3) << "," << (r.failed ? "yes" : "no") << "\n";
    }
    for (const TrendResult& t : trends) {
        os << grid_name << ",trend," << t.spec.metric << " " << t.spec.row_a << " "
           << t.spec.dir << " " << t.spec.row_b << ",," << fmt(t.value_a, 3) << ","
           << fmt(t.value_b, 3) << "," << fmt(t.margin, 3) << "," << (t.pass ? "yes" : "NO")
           << ",,,\n";
    }
    return os.str();
}

std::string GridReport::markdown() const {
    std::ostringstream os;
    os << "# Grid report: " << grid_name << "\n\n";
    os << "Seeds:";
    for (uint64_t s : seeds) os << " " << s;
    os << "\n\n";
    os << "| row | label | freeze | preset ratio | expected | delta | median BLEU | "
          "median PPL | status |\n";
    os << "|---|---|---|---|---|---|---|---|---|\n";
    for (const RowSummary& r : rows) {
        os << "| " << r.row.id << " | " << r.row.label << " | `"
           << (r.row.freeze.empty() ? "-" : r.row.freeze) << "` | " << fmt(r.preset_ratio, 3)
           << " | " << (r.row.expect_ratio ? fmt(*r.row.expect_ratio, 2) : "-") << " | "
           << (r.ratio_delta ? fmt(*r.ratio_delta, 4) : "-") << " | "
           << (r.median_bleu ? fmt(*r.median_bleu, 2) : "-") << " | " << fmt(r.median_ppl, 2)
           << " | " << (r.failed ? "FAILED" : (r.ratio_ok ? "ok" : "RATIO MISMATCH"))
           << " |\n";
    }
    if (!trends.empty()) {
        os << "\n## Trend assertions\n\n";
        for (const TrendResult& t : trends) os << "- " << t.describe() << "\n";
    }
    if (!hard_failures.empty()) {
        os << "\n## Hard failures\n\n";
        for (const auto& f : hard_failures) os << "- " << f << "\n";
    }
    if (!warnings.empty()) {
        os << "\n## Warnings\n\n";
        for (const auto& w : warnings) os << "- " << w << "\n";
    }
    os << "\nExit code: " << exit_code() << "\n";
    return os.str();
}

// ---- execution ----------------------------------------------------------------------

int effective_jobs(int requested) {
    int jobs = requested > 0 ? requested
                             : std::min(4u, std::max(1u, std::thread::hardware_concurrency()));
    if (const char* cap = std::getenv("PFROST_THREADS")) {
        try {
            const int c = std::stoi(cap);
            if (c >= 1) jobs = std::min(jobs, c);
        } catch (const std::exception&) {
            // ignore malformed values
        }
    }
    return std::max(1, jobs);
}

GridReport run_grid(const GridSpec& grid, int jobs, const std::string& out_dir) {
    GridReport report;
    report.grid_name = grid.name;
    report.seeds = grid.seeds;
    if (grid.rows.empty()) return report;  // empty grid, empty report, exit 0

    // Shared, read-only dataset; workers own everything else.
    MtDataset mt;
    LmDataset lm;
    const bool is_lm = grid.task.is_lm();
    if (is_lm) {
        lm = build_lm_dataset(grid.task);
    } else {
        mt = build_mt_dataset(grid.task);
    }
    ModelConfig mcfg = grid.model;
    if (mcfg.vocab_size == 0) mcfg.vocab_size = is_lm ? lm.vocab.size() : mt.vocab.size();
    if (is_lm) {
        mcfg.mode = Mode::language_model;
        mcfg.n_enc_layers = 0;
    }
    mcfg.validate();

    const size_t n_rows = grid.rows.size(), n_seeds = grid.seeds.size();
    std::vector<std::vector<RunOutcome>> results(n_rows, std::vector<RunOutcome>(n_seeds));

    std::atomic<size_t> next{0};
    const size_t total_items = n_rows * n_seeds;
    auto worker = [&]() {
        for (;;) {
            const size_t item = next.fetch_add(1);
            if (item >= total_items) return;
            const size_t ri = item / n_seeds, si = item % n_seeds;
            RunOutcome& out = results[ri][si];
            try {
                TrainConfig tc = grid.train;
                tc.seed = grid.seeds[si];
                TransformerModel model(mcfg, grid.seeds[si]);
                const FreezeSpec spec = FreezeSpec::parse(grid.rows[ri].freeze);
                out.record = is_lm ? train(model, lm, spec, tc) : train(model, mt, spec, tc);
                out.ok = true;
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            }
        }
    };
    const int n_threads = std::min<size_t>(effective_jobs(jobs), total_items);
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // Aggregation in fixed row order, independent of execution schedule.
    for (size_t ri = 0; ri < n_rows; ++ri) {
        RowSummary sum;
        sum.row = grid.rows[ri];
        sum.per_seed = results[ri];
        const FreezeSpec spec = FreezeSpec::parse(sum.row.freeze);

        std::vector<double> ppls, bleus;
        for (size_t si = 0; si < n_seeds; ++si) {
            const RunOutcome& o = results[ri][si];
            if (!o.ok) {
                sum.failed = true;
                report.hard_failures.push_back("row " + sum.row.id + " seed " +
                                               std::to_string(grid.seeds[si]) + ": " + o.error);
                continue;
            }
            ppls.push_back(o.record.best_ppl);
            if (o.record.best_bleu) bleus.push_back(*o.record.best_bleu);
        }
        if (!ppls.empty()) sum.median_ppl = median(ppls);
        if (!bleus.empty()) sum.median_bleu = median(bleus);

        sum.toy_ratio = count_budget(mcfg, spec).ratio;
        const bool deferred = spec.freeze_at_epoch && *spec.freeze_at_epoch > 0;
        for (size_t si = 0; si < n_seeds; ++si) {
            const RunOutcome& o = results[ri][si];
            if (!o.ok) continue;
            const bool schedule_completed =
                !deferred || o.record.epochs_run > static_cast<size_t>(*spec.freeze_at_epoch);
            if (schedule_completed && o.record.ratio != sum.toy_ratio) {
                report.hard_failures.push_back(
                    "row " + sum.row.id + ": run ratio " + fmt(o.record.ratio) +
                    " disagrees with count_budget ratio " + fmt(sum.toy_ratio));
            }
        }

        if (!grid.ratio_preset.empty()) {
            sum.preset_ratio = count_budget(preset(grid.ratio_preset), spec).ratio;
        } else {
            sum.preset_ratio = sum.toy_ratio;
        }
        if (sum.row.expect_ratio) {
            sum.ratio_delta = std::abs(sum.preset_ratio - *sum.row.expect_ratio);
            sum.ratio_ok = *sum.ratio_delta <= 0.02;
            if (!sum.ratio_ok) {
                report.hard_failures.push_back(
                    "row " + sum.row.id + ": ratio " + fmt(sum.preset_ratio, 4) +
                    " deviates from expected " + fmt(*sum.row.expect_ratio, 4) + " by " +
                    fmt(*sum.ratio_delta, 4) + " (> 0.02)");
            }
        }
        report.rows.push_back(std::move(sum));
    }

    for (const TrendAssert& t : grid.trends) {
        try {
            const TrendResult r = assert_ordering(report, t.row_a, t.row_b, t.metric, t.dir);
            if (!r.pass) {
                report.warnings.push_back("trend failed: " + r.describe());
            }
            report.trends.push_back(r);
        } catch (const std::exception& e) {
            report.warnings.push_back("trend " + t.metric + " " + t.row_a + t.dir + t.row_b +
                                      " not evaluable: " + e.what());
        }
    }

    if (!out_dir.empty()) {
        fs::create_directories(fs::path(out_dir) / "runs");
        std::ofstream(fs::path(out_dir) / "runs.csv") << report.runs_csv();
        std::ofstream(fs::path(out_dir) / "summary.csv") << report.summary_csv();
        std::ofstream(fs::path(out_dir) / "report.md") << report.markdown();
        std::ostringstream timing;
        timing << "grid,row,seed,wall_seconds\n";
        for (size_t ri = 0; ri < n_rows; ++ri) {
            for (size_t si = 0; si < n_seeds; ++si) {
                const RunOutcome& o = results[ri][si];
                timing << grid.name << "," << grid.rows[ri].id << "," << grid.seeds[si] << ","
                       << (o.ok ? fmt(o.record.wall_seconds, 3) : "") << "\n";
                if (o.ok) {
                    std::ofstream(fs::path(out_dir) / "runs" /
                                  (grid.rows[ri].id + "_s" + std::to_string(grid.seeds[si]) +
                                   ".metrics.csv"))
                        << o.record.metrics_csv();
                }
            }
        }
        std::ofstream(fs::path(out_dir) / "timings.csv") << timing.str();
    }
    return report;
}

// ---- report re-rendering ---------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (char c : line) {
            if (quoted) {
                if (c == '"') quoted = false;
                else cur += c;
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(cur);
        rows.push_back(std::move(fields));
    }
    return rows;
}

void csv_to_md_table(std::ostringstream& os, const std::vector<std::vector<std::string>>& rows) {
    if (rows.empty()) return;
    for (size_t r = 0; r < rows.size(); ++r) {
        os << "|";
        for (const std::string& f : rows[r]) os << " " << (f.empty() ? "-" : f) << " |";
        os << "\n";
        if (r == 0) {
            os << "|";
            for (size_t i = 0; i < rows[0].size(); ++i) os << "---|";
            os << "\n";
        }
    }
}

}  // namespace

std::string render_report_dir(const std::string& dir) {
    std::ostringstream os;
    os << "# Grid report (" << fs::path(dir).filename().string() << ")\n\n## Runs\n\n";
    csv_to_md_table(os, parse_csv((fs::path(dir) / "runs.csv").string()));
    os << "\n## Summary\n\n";
    csv_to_md_table(os, parse_csv((fs::path(dir) / "summary.csv").string()));
    return os.str();
}

}  // namespace pfrost
