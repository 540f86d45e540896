// Acceptance suite: one PASS/FAIL line per criterion.
//
//   jocot_acceptance            run every criterion
//   jocot_acceptance 1 3 7      run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "jocot/checkpoint.hpp"
#include "jocot/config.hpp"
#include "jocot/experiment.hpp"
#include "jocot/noise.hpp"
#include "jocot/selection.hpp"
#include "jocot/trainer.hpp"
#include "support/gradient_oracle.hpp"
#include "support/selection_oracle.hpp"

using namespace jocot;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
    double extra_seconds = 0.0;  // cached work this criterion depends on
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string pct(double v) { return fmt("%.2f%%", 100.0 * v); }

// Desk-scale synthetic setup shared by the efficacy criteria.
constexpr int kEpochs = 60;
constexpr int kDecayStart = 16;  // 80 of 300, scaled to 60
constexpr double kSeparation = 5.0;
const std::vector<std::uint64_t> kSeeds{1, 2, 3};

ExperimentConfig desk_config() {
    ExperimentConfig c;
    c.data.classes = 12;
    c.data.per_class = 600;
    c.data.dim = kSkeletonFeatureDim;
    c.data.separation = kSeparation;
    c.data.seed = 2024;
    c.train.total_epochs = kEpochs;
    c.train.decay_start_epoch = kDecayStart;
    c.noise_kinds = {NoiseKind::symmetric};
    return c;
}

struct TimedCell {
    CellResult cell;
    double seconds = 0.0;
};

class CellCache {
public:
    CellCache() : config_(desk_config()) {}

    const TimedCell& get(Method method, double rate, std::uint64_t seed) {
        if (!data_) data_ = prepare_data(config_.data);
        const auto key = std::make_tuple(static_cast<int>(method), rate, seed);
        auto it = cells_.find(key);
        if (it != cells_.end()) return it->second;
        const auto t0 = Clock::now();
        CellResult cell = run_cell(method, NoiseKind::symmetric, rate, seed, config_, *data_);
        TimedCell timed{std::move(cell), seconds_since(t0)};
        std::printf("    cell %-32s acc %s  prec %s  |D| %zu  (%.1f s)\n", timed.cell.name().c_str(),
                    pct(timed.cell.test_accuracy).c_str(),
                    timed.cell.noisy_label_precision ? fmt("%.4f", *timed.cell.noisy_label_precision).c_str() : "-",
                    timed.cell.clean_set_size, timed.seconds);
        std::fflush(stdout);
        return cells_.emplace(key, std::move(timed)).first->second;
    }

    struct Mean {
        double accuracy = 0.0;
        double precision = 0.0;
        double clean_fraction = 0.0;
        double seconds = 0.0;  // total compute behind the mean
    };

    Mean mean(Method method, double rate) {
        Mean m;
        for (auto seed : kSeeds) {
            const TimedCell& t = get(method, rate, seed);
            m.accuracy += t.cell.test_accuracy / static_cast<double>(kSeeds.size());
            m.precision += t.cell.noisy_label_precision.value_or(0.0) / static_cast<double>(kSeeds.size());
            m.clean_fraction += static_cast<double>(t.cell.clean_set_size) /
                                static_cast<double>(t.cell.train_size) / static_cast<double>(kSeeds.size());
            m.seconds += t.seconds;
        }
        return m;
    }

    /// Compute spent in this process, used to separate fresh from cached work.
    double total_seconds() const {
        double s = 0.0;
        for (const auto& [k, v] : cells_) s += v.seconds;
        return s;
    }

private:
    ExperimentConfig config_;
    std::optional<PreparedData> data_;
    std::map<std::tuple<int, double, std::uint64_t>, TimedCell> cells_;
};

CellCache& cache() {
    static CellCache c;
    return c;
}

// Cached compute a criterion reused rather than produced.
struct CacheLedger {
    double before = cache().total_seconds();
    double reused(double needed) const { return std::max(0.0, needed - (cache().total_seconds() - before)); }
};

// 1. Analytic gradients against central finite differences.
Outcome gradient_oracle() {
    const oracle::LossKind kinds[] = {oracle::LossKind::ce, oracle::LossKind::kl, oracle::LossKind::joint};
    int configs = 0;
    double worst = 0.0;
    std::size_t params = 0;
    for (std::uint64_t seed = 1000; seed < 1008; ++seed)
        for (auto kind : kinds) {
            const auto check = oracle::finite_difference_check(oracle::random_case(seed, kind));
            worst = std::max(worst, check.max_rel_error);
            params += check.checked;
            ++configs;
        }
    Outcome o;
    o.pass = configs >= 20 && worst < 1e-5;
    o.detail = std::to_string(configs) + " configs (ce/kl/joint), " + std::to_string(params) +
               " parameters, max rel err " + fmt("%.2e", worst) + " < 1e-5";
    return o;
}

// 2. Transition matrix structure and realized flip fractions.
Outcome noise_suite() {
    bool ok = true;
    double worst_row = 0.0;
    for (auto kind : {NoiseKind::pairflip, NoiseKind::symmetric})
        for (int m : {2, 3, 12})
            for (int k = 0; k < 20; ++k) {
                const auto w = build_noise_matrix(kind, k * 0.05, m);
                for (const auto& row : w.rows) {
                    double s = 0.0;
                    for (double v : row) s += v;
                    worst_row = std::max(worst_row, std::abs(s - 1.0));
                }
            }
    ok = ok && worst_row <= 1e-12;

    bool structure = true;
    for (int m : {2, 3, 12}) {
        const double rate = 0.35;
        const auto w = build_noise_matrix(NoiseKind::pairflip, rate, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const double expect = j == i ? 1.0 - rate : (j == (i + 1) % m ? rate : 0.0);
                structure = structure && w.rows[i][j] == expect;
            }
    }
    ok = ok && structure;

    std::vector<int> labels(11520);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 12);
    double worst_dev = 0.0;
    std::string fractions;
    for (auto kind : {NoiseKind::symmetric, NoiseKind::pairflip})
        for (double tau : {0.2, 0.4, 0.8}) {
            const auto mask = inject_noise(labels, build_noise_matrix(kind, tau, 12), 31);
            worst_dev = std::max(worst_dev, std::abs(mask.flipped_fraction() - tau));
            fractions += fmt(" %.4f", mask.flipped_fraction());
        }
    ok = ok && worst_dev <= 0.015;

    Outcome o;
    o.pass = ok;
    o.detail = "row-sum err " + fmt("%.1e", worst_row) + ", pairflip structure " + (structure ? "exact" : "WRONG") +
               ", realized" + fractions + " (max dev " + fmt("%.4f", worst_dev) + " <= 0.015)";
    return o;
}

// 3. Remember-rate schedule values, monotonicity and clamp.
Outcome remember_rate_exactness() {
    bool exact = true, monotone = true, clamped = true;
    int checked = 0;
    for (int k = 1; k <= 8; ++k) {
        const double tau = k / 10.0;
        double prev = 2.0;
        for (int e = 0; e <= 20; ++e) {
            const double expect = 1.0 - std::min(static_cast<double>(e) / 10.0 * tau, tau);
            const double got = remember_rate(e, 10, tau);
            exact = exact && got == expect;
            monotone = monotone && got <= prev;
            if (e >= 10) clamped = clamped && got == 1.0 - tau;
            prev = got;
            ++checked;
        }
    }
    Outcome o;
    o.pass = exact && monotone && clamped;
    o.detail = std::to_string(checked) + " grid points; bit-exact " + (exact ? "yes" : "no") + ", monotone " +
               (monotone ? "yes" : "no") + ", clamp at 1-tau " + (clamped ? "yes" : "no");
    return o;
}

// 4. Small-loss selection against exhaustive subset enumeration.
Outcome selection_oracle() {
    Rng rng(4242);
    int agree = 0, trials = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 10);
        std::vector<IndexedLoss> items;
        for (std::size_t i = 0; i < n; ++i) items.push_back({rng.index(100000), rng.uniform(0.0, 5.0)});
        // Distinct global indices.
        std::set<std::size_t> used;
        for (auto& it : items)
            while (!used.insert(it.index).second) ++it.index;
        for (std::size_t k = 1; k <= n; ++k) {
            const double keep = static_cast<double>(k) / static_cast<double>(n);
            const auto got = small_loss_select(items, keep);
            const auto opt = oracle::exhaustive_min_subsets(items, kept_count(keep, n));
            const bool match = got.size() == kept_count(keep, n) &&
                               std::find(opt.minimizers.begin(), opt.minimizers.end(), got.indices()) !=
                                   opt.minimizers.end();
            agree += match;
            ++trials;
        }
    }
    Outcome o;
    o.pass = agree == trials;
    o.detail = std::to_string(agree) + "/" + std::to_string(trials) + " selections minimal over 200 loss vectors (n <= 10)";
    return o;
}

// 5. Consensus laws on a live run and on random quadruples.
Outcome consensus_laws() {
    auto train = synthesize(12, 100, kSkeletonFeatureDim, kSeparation, 55);
    const auto mask = inject_noise(train.labels, build_noise_matrix(NoiseKind::symmetric, 0.4, 12), 56);
    train = train.with_labels(mask.noisy_labels);
    TrainConfig c;
    c.total_epochs = 5;
    c.decay_start_epoch = 2;
    c.num_gradual_T = 2;
    c.noise_rate_tau = 0.4;
    std::size_t batches = 0, violations = 0;
    Monitor monitor;
    monitor.on_batch = [&](const BatchConsensus& bc) {
        ++batches;
        for (const auto* s : {&bc.p1, &bc.p2, &bc.q1, &bc.q2, &bc.ip, &bc.iq})
            if (!bc.icon.is_subset_of(*s)) ++violations;
    };
    train_teachers(c, train, monitor);

    Rng rng(57);
    int equal = 0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<std::vector<std::size_t>> raw(4);
        const std::size_t universe = 1 + rng.index(40);
        for (auto& s : raw)
            for (std::size_t i = 0; i < universe; ++i)
                if (rng.uniform() < 0.7) s.push_back(i);
        const auto icon = outer_consensus(inner_consensus(SelectionSet(raw[0]), SelectionSet(raw[1])),
                                          inner_consensus(SelectionSet(raw[2]), SelectionSet(raw[3])));
        std::vector<std::size_t> direct;
        for (std::size_t i = 0; i < universe; ++i) {
            bool all = true;
            for (const auto& s : raw) all = all && std::binary_search(s.begin(), s.end(), i);
            if (all) direct.push_back(i);
        }
        equal += icon.indices() == direct;
    }
    Outcome o;
    o.pass = batches > 0 && violations == 0 && equal == 1000;
    o.detail = std::to_string(batches) + " live batches, " + std::to_string(violations) + " subset violations; " +
               std::to_string(equal) + "/1000 quadruples equal the 4-way intersection";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 6. Two identical-seed pipeline runs agree bit for bit.
Outcome determinism() {
    ExperimentConfig c = desk_config();
    c.methods = {Method::jocot};
    c.rates = {0.4};
    c.seeds = {1};
    c.train.total_epochs = 20;
    c.train.decay_start_epoch = 5;  // 80 of 300, scaled to 20
    c.save_checkpoints = true;
    const fs::path root = fs::temp_directory_path() / "jocot_acceptance_determinism";
    fs::remove_all(root);
    std::vector<fs::path> dirs{root / "a", root / "b"};
    for (const auto& d : dirs) {
        c.out_dir = d;
        const auto result = run_experiment(c);
        if (!result.all_succeeded()) return {false, "pipeline run failed: " + result.cells.front().error.value_or("")};
        emit_metrics(result, d);
    }
    const std::string stem = "jocot_symmetric_0.4_s1";
    const auto ca = load_checkpoint(dirs[0] / ("model_" + stem + ".ckpt"));
    const auto cb = load_checkpoint(dirs[1] / ("model_" + stem + ".ckpt"));
    const bool params_equal = ca.network == cb.network;
    std::size_t files = 0, identical = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
        if (entry.path().extension() != ".csv") continue;
        ++files;
        identical += slurp(entry.path()) == slurp(dirs[1] / entry.path().filename());
    }
    fs::remove_all(root);
    Outcome o;
    o.pass = params_equal && files >= 3 && identical == files;
    o.detail = std::string("student parameters ") + (params_equal ? "bitwise identical" : "DIFFER") + ", " +
               std::to_string(identical) + "/" + std::to_string(files) + " metric CSVs byte-identical (20 epochs)";
    return o;
}

// 7. JoCoT beats no-defense training at 40% symmetric noise.
Outcome efficacy() {
    CacheLedger ledger;
    const auto clean = cache().mean(Method::ce_baseline, 0.0);
    const auto ce = cache().mean(Method::ce_baseline, 0.4);
    const auto jc = cache().mean(Method::jocot, 0.4);
    const double gap = jc.accuracy - ce.accuracy;
    Outcome o;
    o.pass = clean.accuracy >= 0.95 && gap >= 0.05 && jc.precision >= 0.80;
    o.detail = "clean ce " + pct(clean.accuracy) + " (>= 95%); tau=0.4 jocot " + pct(jc.accuracy) + " vs ce " +
               pct(ce.accuracy) + " gap " + fmt("%.2f", 100 * gap) + " pts (>= 5); precision " +
               fmt("%.4f", jc.precision) + " (>= 0.80)";
    o.extra_seconds = ledger.reused(clean.seconds + ce.seconds + jc.seconds);
    return o;
}

// 8. JoCoT flags at least as much noise as either module alone at tau=0.6.
Outcome ordering() {
    CacheLedger ledger;
    const auto jc = cache().mean(Method::jocot, 0.6);
    const auto jr = cache().mean(Method::jocor, 0.6);
    const auto ct = cache().mean(Method::coteaching, 0.6);
    Outcome o;
    o.pass = jc.precision >= jr.precision && jc.precision >= ct.precision;
    o.detail = "precision jocot " + fmt("%.4f", jc.precision) + " >= jocor " + fmt("%.4f", jr.precision) +
               " and >= coteaching " + fmt("%.4f", ct.precision);
    o.extra_seconds = ledger.reused(jc.seconds + jr.seconds + ct.seconds);
    return o;
}

// 9. Accuracy does not rise with the noise rate.
Outcome monotone_degradation() {
    CacheLedger ledger;
    const auto a2 = cache().mean(Method::jocot, 0.2);
    const auto a4 = cache().mean(Method::jocot, 0.4);
    const auto a6 = cache().mean(Method::jocot, 0.6);
    Outcome o;
    o.pass = a4.accuracy <= a2.accuracy + 0.01 && a6.accuracy <= a4.accuracy + 0.01;
    o.detail = "jocot accuracy tau 0.2/0.4/0.6: " + pct(a2.accuracy) + " / " + pct(a4.accuracy) + " / " +
               pct(a6.accuracy) + " (non-increasing within 1 pt)";
    o.extra_seconds = ledger.reused(a2.seconds + a4.seconds + a6.seconds);
    return o;
}

// 10. Zero noise passes the whole training set to the student.
Outcome pipeline_identity() {
    CacheLedger ledger;
    const auto jc = cache().mean(Method::jocot, 0.0);
    const auto clean = cache().mean(Method::ce_baseline, 0.0);
    const double diff = std::abs(jc.accuracy - clean.accuracy);
    Outcome o;
    o.pass = jc.clean_fraction >= 0.99 && diff <= 0.01;
    o.detail = "D-hat covers " + pct(jc.clean_fraction) + " of train (>= 99%); student " + pct(jc.accuracy) +
               " vs clean ce " + pct(clean.accuracy) + " (|diff| " + fmt("%.2f", 100 * diff) + " <= 1 pt)";
    o.extra_seconds = ledger.reused(jc.seconds + clean.seconds);
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "gradient oracle", 60, gradient_oracle},
        {2, "noise-matrix suite", 10, noise_suite},
        {3, "remember-rate exactness", 1, remember_rate_exactness},
        {4, "selection oracle", 10, selection_oracle},
        {5, "consensus laws", 30, consensus_laws},
        {6, "determinism", 300, determinism},
        {7, "end-to-end efficacy", 900, efficacy},
        {8, "directional ordering", 900, ordering},
        {9, "monotone degradation", 1500, monotone_degradation},
        {10, "pipeline identity at tau=0", 300, pipeline_identity},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failed = 0, ran = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        ++ran;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = seconds_since(t0) + o.extra_seconds;
        const bool in_budget = elapsed <= c.budget_seconds;
        const bool pass = o.pass && in_budget;
        failed += !pass;
        std::printf("%s [%d] %s: %s [%.1f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), elapsed, c.budget_seconds, in_budget ? "" : ", OVER BUDGET");
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
