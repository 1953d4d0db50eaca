#include "vmfexp/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <CLI11.hpp>

#include "vmfexp/data.hpp"
#include "vmfexp/embedding.hpp"
#include "vmfexp/errors.hpp"
#include "vmfexp/estimate.hpp"
#include "vmfexp/index.hpp"
#include "vmfexp/montecarlo.hpp"
#include "vmfexp/parallel.hpp"
#include "vmfexp/policy.hpp"
#include "vmfexp/table.hpp"
#include "vmfexp/theory.hpp"
#include "vmfexp/vmf.hpp"

namespace vmfexp::cli {

namespace {

class UsageError : public DomainError {
public:
    using DomainError::DomainError;
};

// Stream tags for command-level randomness.
constexpr std::uint64_t kTagPair = 0x9a12;
constexpr std::uint64_t kTagSubset = 0x5b5e;
constexpr std::uint64_t kTagSynthetic = 0x5e7;
constexpr std::uint64_t kTagBench = 0xbe7c;
constexpr std::uint64_t kTagDiversity = 0xd1e5;

// Accepts plain or scientific notation ("100000", "1e5") for whole numbers >= 1.
std::uint64_t parse_count(const std::string& text, const std::string& flag) {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || !(value >= 1.0) || value > 0x1.0p53 ||
        value != std::floor(value)) {
        throw UsageError(flag + " expects a whole number >= 1, got '" + text + "'");
    }
    return static_cast<std::uint64_t>(value);
}

std::vector<std::uint64_t> parse_counts(const std::vector<std::string>& texts, const std::string& flag) {
    std::vector<std::uint64_t> out;
    for (const auto& t : texts) out.push_back(parse_count(t, flag));
    if (out.empty()) throw UsageError(flag + " is empty");
    return out;
}

struct CommonOptions {
    std::uint64_t seed = 0;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string output;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_workers) {
    cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    if (with_workers) {
        cmd->add_option("--workers", o.workers, "Worker threads; results do not depend on it")
            ->capture_default_str();
    }
    cmd->add_option("--output", o.output, "Output file (default: stdout)");
    cmd->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

void check_workers(const CommonOptions& o) {
    if (o.workers < 1) throw UsageError("--workers must be >= 1");
}

void emit(const Table& table, const CommonOptions& o, std::ostream& out) {
    std::ostringstream buf;
    write_table(buf, table, o.format == "json" ? OutputFormat::json : OutputFormat::csv);
    if (o.output.empty()) {
        out << buf.str() << std::flush;
        return;
    }
    std::ofstream file(o.output, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write " + o.output);
    file << buf.str();
    file.flush();
    if (!file) throw IoError("write failed: " + o.output);
}

Cell optional_cell(const std::optional<double>& x) {
    if (!x) return std::monostate{};
    return *x;
}

std::shared_ptr<const EmbeddingSet> synthetic_uniform(std::uint64_t n, int d, std::uint64_t seed) {
    RandomSource rng(seed, stream_key({kTagSynthetic, n, static_cast<std::uint64_t>(d)}));
    std::vector<double> rows;
    rows.reserve(n * static_cast<std::size_t>(d));
    for (std::uint64_t i = 0; i < n; ++i) {
        const UnitVector x = sample_uniform_sphere(d, rng);
        rows.insert(rows.end(), x.coords().begin(), x.coords().end());
    }
    std::vector<ActionId> ids(n);
    std::iota(ids.begin(), ids.end(), ActionId{0});
    return std::make_shared<const EmbeddingSet>(d, std::move(rows), std::move(ids));
}

std::shared_ptr<const EmbeddingSet> load_corpus(const std::string& path, std::optional<std::uint64_t> limit,
                                                std::ostream& err) {
    if (!std::filesystem::exists(path)) throw UsageError("embedding file not found: " + path);
    const RawEmbeddings raw = load_embeddings({path, detect_embedding_format(path)}, limit);
    if (raw.malformed_lines > 0) err << "warning: skipped " << raw.malformed_lines << " malformed lines\n";
    if (raw.duplicate_tokens > 0) err << "warning: skipped " << raw.duplicate_tokens << " duplicate tokens\n";
    std::size_t dropped = 0;
    auto set = std::make_shared<const EmbeddingSet>(center_and_normalize(raw, &dropped));
    if (dropped > 0) err << "warning: dropped " << dropped << " vectors equal to the mean\n";
    return set;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    int d = 2;
    double kappa = 1.0;
    double dot_va = 0.5;
    std::vector<std::string> n_grid = {"1000", "3000", "10000", "30000", "100000"};
    std::string trials;
    std::string resample_sets;
    bool fast = false;
    std::string estimator = "cell";
    CommonOptions common;
};

void setup_simulate(CLI::App& app, SimulateOptions& o) {
    auto* cmd = app.add_subcommand("simulate", "Monte Carlo grid under i.i.d. uniform embeddings");
    cmd->add_option("--d", o.d, "Dimension")->capture_default_str();
    cmd->add_option("--kappa", o.kappa, "Concentration")->capture_default_str();
    cmd->add_option("--dot-va", o.dot_va, "<V, A>")->capture_default_str();
    cmd->add_option("--n-grid", o.n_grid, "Comma separated action counts")->delimiter(',');
    cmd->add_option("--trials", o.trials, "vMF-exp draws per point (default 8e6, 1e5 with --fast)");
    cmd->add_option("--resample-sets", o.resample_sets,
                    "Uniform sets per point (default 2e5, 2000 with --fast)");
    cmd->add_flag("--fast", o.fast, "Reduced budget for quick runs");
    cmd->add_option("--estimator", o.estimator, "vMF-exp estimator: cell or direct")
        ->check(CLI::IsMember({"cell", "direct"}))
        ->capture_default_str();
    add_common(cmd, o.common, true);
}

Table cmd_simulate(const SimulateOptions& o) {
    check_workers(o.common);
    ExperimentSpec spec;
    spec.d = o.d;
    spec.kappa = o.kappa;
    spec.dot_va = o.dot_va;
    spec.n_grid = parse_counts(o.n_grid, "--n-grid");
    spec.trials = o.trials.empty() ? (o.fast ? 100'000 : 8'000'000) : parse_count(o.trials, "--trials");
    spec.resample_sets = o.resample_sets.empty() ? (o.fast ? 2'000 : 200'000)
                                                 : parse_count(o.resample_sets, "--resample-sets");
    spec.seed = o.common.seed;
    spec.workers = o.common.workers;
    spec.vmf_estimator = o.estimator == "direct" ? VmfEstimator::direct : VmfEstimator::cell;
    try {
        spec.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }

    Table table{{"n", "p_vmf", "p_vmf_ci", "p_boltz", "p_boltz_ci", "p0", "p1"}, {}};
    for (const auto& row : run_grid(spec)) {
        table.rows.push_back({row.n, row.p_vmf.p_hat, row.p_vmf.half_width_95, row.p_boltz.p_hat,
                              row.p_boltz.half_width_95, row.p0, optional_cell(row.p1)});
    }
    return table;
}

// ---------------------------------------------------------------- realdata

struct RealdataOptions {
    std::string embeddings;
    std::string limit;
    std::vector<std::string> n_grid = {"20000", "40000", "60000", "80000", "100000"};
    std::vector<double> targets = {0.9, 0.3, 0.0, -0.3, -0.9};
    double tolerance = 0.01;
    std::string probe_budget = "1e7";
    double kappa = 1.0;
    std::string trials;
    std::string resample_sets;
    bool fast = false;
    CommonOptions common;
};

void setup_realdata(CLI::App& app, RealdataOptions& o) {
    auto* cmd = app.add_subcommand("realdata", "B-exp vs vMF-exp on a real embedding corpus");
    cmd->add_option("--embeddings", o.embeddings, "Text or snapshot embedding file")->required();
    cmd->add_option("--limit", o.limit, "Read at most this many vectors");
    cmd->add_option("--n-grid", o.n_grid, "Comma separated subset sizes")->delimiter(',');
    cmd->add_option("--target-dot,--dot-va", o.targets, "Comma separated <V, A> targets")->delimiter(',');
    cmd->add_option("--dot-tolerance", o.tolerance, "Allowed |<V, A> - target|")->capture_default_str();
    cmd->add_option("--probe-budget", o.probe_budget, "Pair probes per target")->capture_default_str();
    cmd->add_option("--kappa", o.kappa, "Concentration")->capture_default_str();
    cmd->add_option("--trials", o.trials, "vMF-exp draws per point (default 2e5, 1e4 with --fast)");
    cmd->add_option("--resample-sets", o.resample_sets, "Subsets per point (default 200, 20 with --fast)");
    cmd->add_flag("--fast", o.fast, "Reduced budget for quick runs");
    add_common(cmd, o.common, true);
}

struct SubsetResult {
    double p_boltz = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t draws = 0;
};

Table cmd_realdata(const RealdataOptions& o, std::ostream& err) {
    check_workers(o.common);
    const auto n_grid = parse_counts(o.n_grid, "--n-grid");
    const std::optional<std::uint64_t> limit =
        o.limit.empty() ? std::nullopt : std::optional(parse_count(o.limit, "--limit"));
    const std::uint64_t trials = o.trials.empty() ? (o.fast ? 10'000 : 200'000) : parse_count(o.trials, "--trials");
    const std::uint64_t subsets = std::min(
        trials, o.resample_sets.empty() ? (o.fast ? 20 : 200) : parse_count(o.resample_sets, "--resample-sets"));
    const std::uint64_t budget = parse_count(o.probe_budget, "--probe-budget");
    if (!std::isfinite(o.kappa) || o.kappa < 0.0) throw UsageError("--kappa must be >= 0");
    if (!(o.tolerance > 0.0)) throw UsageError("--dot-tolerance must be > 0");
    if (o.targets.empty()) throw UsageError("--target-dot is empty");
    for (double t : o.targets) {
        if (!(t >= -1.0 && t <= 1.0)) throw UsageError("--target-dot values must lie in [-1, 1]");
    }

    const auto corpus = load_corpus(o.embeddings, limit, err);
    const int d = corpus->dim();
    const auto dd = static_cast<std::size_t>(d);
    const std::size_t total = corpus->size();
    for (auto n : n_grid) {
        if (n + 2 > total) {
            throw UsageError("--n-grid value " + std::to_string(n) + " needs at least " + std::to_string(n + 2) +
                             " vectors, corpus has " + std::to_string(total));
        }
    }

    Table table{{"n", "dot_va", "p_vmf", "p_vmf_ci", "p_boltz", "p_boltz_ci", "p0", "p1", "actual_dot", "note"},
                {}};
    for (std::size_t ti = 0; ti < o.targets.size(); ++ti) {
        const double target = o.targets[ti];
        RandomSource pair_rng(o.common.seed, stream_key({kTagPair, ti}));
        std::pair<ActionId, ActionId> pair;
        try {
            pair = find_pair_with_dot(*corpus, target, o.tolerance, pair_rng, budget);
        } catch (const NotFoundError& e) {
            err << "warning: " << e.what() << '\n';
            table.rows.push_back({std::monostate{}, target, std::monostate{}, std::monostate{}, std::monostate{},
                                  std::monostate{}, std::monostate{}, std::monostate{}, e.closest(),
                                  std::string("pair not found")});
            continue;
        }
        const std::size_t v_row = corpus->row_of(pair.first);
        const std::size_t a_row = corpus->row_of(pair.second);
        const UnitVector v = corpus->vector(v_row);
        const double actual = dot(corpus->row(v_row), corpus->row(a_row));
        std::vector<std::uint32_t> pool;
        pool.reserve(total - 2);
        for (std::size_t r = 0; r < total; ++r) {
            if (r != v_row && r != a_row) pool.push_back(static_cast<std::uint32_t>(r));
        }
        const VmfParams params(v, o.kappa);

        for (auto n : n_grid) {
            const std::uint64_t base = trials / subsets;
            const std::uint64_t extra = trials % subsets;
            const auto results = parallel_map<SubsetResult>(subsets, o.common.workers, [&](std::uint64_t s) {
                RandomSource rng(o.common.seed, stream_key({kTagSubset, ti, n, s}));
                std::vector<std::uint32_t> order = pool;
                std::vector<double> rows;
                rows.reserve((n + 1) * dd);
                for (std::uint64_t i = 0; i < n; ++i) {
                    std::swap(order[i], order[i + rng.below(order.size() - i)]);
                    const auto row = corpus->row(order[i]);
                    rows.insert(rows.end(), row.begin(), row.end());
                }
                const auto anchor = corpus->row(a_row);
                rows.insert(rows.end(), anchor.begin(), anchor.end());
                std::vector<ActionId> ids(n + 1);
                std::iota(ids.begin(), ids.end(), ActionId{0});
                const auto set = std::make_shared<const EmbeddingSet>(d, std::move(rows), std::move(ids));

                SubsetResult result;
                result.p_boltz = prob_boltzmann(*set, v, o.kappa, n);
                result.draws = base + (s < extra ? 1 : 0);
                const ExactIndex index(set);
                std::vector<double> queries;
                for (std::uint64_t done = 0; done < result.draws;) {
                    const std::uint64_t count = std::min<std::uint64_t>(1024, result.draws - done);
                    queries.clear();
                    for (std::uint64_t i = 0; i < count; ++i) {
                        const UnitVector q = sample(params, rng);
                        queries.insert(queries.end(), q.coords().begin(), q.coords().end());
                    }
                    for (const auto& hit : index.nearest_batch(queries)) {
                        if (hit.id == n) ++result.hits;
                    }
                    done += count;
                }
                return result;
            });
            RunningMoments boltz;
            RunningMoments fractions;
            std::uint64_t hits = 0;
            for (const auto& r : results) {
                boltz.add(r.p_boltz);
                fractions.add(static_cast<double>(r.hits) / static_cast<double>(r.draws));
                hits += r.hits;
            }
            const ProbabilityEstimate p_vmf = from_clustered_counts(hits, trials, fractions);
            const ProbabilityEstimate p_boltz = boltz.estimate();
            const AsymptoticInput in{n, d, o.kappa, actual};
            table.rows.push_back({n, target, p_vmf.p_hat, p_vmf.half_width_95, p_boltz.p_hat,
                                  p_boltz.half_width_95, p0(in), d >= 3 ? Cell(p1(in)) : Cell(std::monostate{}),
                                  actual, std::string()});
        }
    }
    return table;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
    std::vector<std::string> n_grid = {"1000", "10000", "100000"};
    int d = 25;
    double kappa = 10.0;
    std::string clusters = "auto";
    std::size_t probes = 8;
    double target_recall = 0.9;
    double budget_seconds = 2.0;
    std::string embeddings;
    std::string limit;
    CommonOptions common;
};

void setup_bench(CLI::App& app, BenchOptions& o) {
    auto* cmd = app.add_subcommand("bench", "Draws per second: exhaustive B-exp vs vMF-exp");
    cmd->add_option("--n-grid", o.n_grid, "Comma separated action counts")->delimiter(',');
    cmd->add_option("--d", o.d, "Dimension of the synthetic sets")->capture_default_str();
    cmd->add_option("--kappa", o.kappa, "Concentration")->capture_default_str();
    cmd->add_option("--clusters", o.clusters, "Approximate index lists, or auto")->capture_default_str();
    cmd->add_option("--probes", o.probes, "Starting probe count; raised until the recall target is met")
        ->capture_default_str();
    cmd->add_option("--target-recall", o.target_recall, "Required recall@10")->capture_default_str();
    cmd->add_option("--budget-seconds", o.budget_seconds, "Timing budget per method and n")
        ->capture_default_str();
    cmd->add_option("--embeddings", o.embeddings, "Use the first n vectors of this corpus instead");
    cmd->add_option("--limit", o.limit, "Read at most this many vectors");
    add_common(cmd, o.common, false);
}

volatile std::uint64_t bench_sink = 0;

// Median of five timed runs after a warmup of a tenth of the budget.
template <class Draw>
double draws_per_second(double budget, Draw draw) {
    using Clock = std::chrono::steady_clock;
    std::uint64_t sink = 0;
    auto run_for = [&](double seconds) {
        const auto start = Clock::now();
        std::uint64_t count = 0;
        double elapsed = 0.0;
        do {
            sink += draw(count++);
            elapsed = std::chrono::duration<double>(Clock::now() - start).count();
        } while (elapsed < seconds);
        return static_cast<double>(count) / elapsed;
    };
    run_for(0.1 * budget);
    std::array<double, 5> rates{};
    for (auto& r : rates) r = run_for(0.18 * budget);
    std::sort(rates.begin(), rates.end());
    bench_sink = sink;
    return rates[2];
}

std::size_t auto_clusters(std::size_t n) {
    std::size_t c = 16;
    while (static_cast<double>(c) < 4.0 * std::sqrt(static_cast<double>(n))) c *= 2;
    return std::min(c, n);
}

Table cmd_bench(const BenchOptions& o, std::ostream& err) {
    const auto n_grid = parse_counts(o.n_grid, "--n-grid");
    if (o.d < 2) throw UsageError("--d must be >= 2");
    if (!std::isfinite(o.kappa) || o.kappa < 0.0) throw UsageError("--kappa must be >= 0");
    if (!(o.target_recall > 0.0 && o.target_recall <= 1.0)) throw UsageError("--target-recall must lie in (0, 1]");
    if (!(o.budget_seconds > 0.0)) throw UsageError("--budget-seconds must be > 0");
    if (o.probes < 1) throw UsageError("--probes must be >= 1");
    std::optional<std::size_t> fixed_clusters;
    if (o.clusters != "auto") fixed_clusters = parse_count(o.clusters, "--clusters");
    std::shared_ptr<const EmbeddingSet> corpus;
    if (!o.embeddings.empty()) {
        corpus = load_corpus(o.embeddings, o.limit.empty() ? std::nullopt
                                                           : std::optional(parse_count(o.limit, "--limit")),
                             err);
        for (auto n : n_grid) {
            if (n > corpus->size()) throw UsageError("--n-grid value exceeds the corpus size");
        }
    }

    Table table{{"n", "d", "clusters", "probes", "recall_at_10", "bexp_draws_per_s", "vmf_exact_draws_per_s",
                 "vmf_approx_draws_per_s", "approx_speedup"},
                {}};
    for (auto n : n_grid) {
        std::shared_ptr<const EmbeddingSet> set;
        if (corpus) {
            const auto dd = static_cast<std::size_t>(corpus->dim());
            std::vector<double> rows(corpus->rows().begin(), corpus->rows().begin() + static_cast<std::ptrdiff_t>(n * dd));
            std::vector<ActionId> ids(n);
            std::iota(ids.begin(), ids.end(), ActionId{0});
            set = std::make_shared<const EmbeddingSet>(corpus->dim(), std::move(rows), std::move(ids));
        } else {
            set = synthetic_uniform(n, o.d, o.common.seed);
        }
        const int d = set->dim();
        const std::size_t k = std::min<std::size_t>(10, n);
        const std::size_t clusters = std::min<std::size_t>(fixed_clusters.value_or(auto_clusters(n)), n);

        RandomSource rng(o.common.seed, stream_key({kTagBench, n}));
        std::vector<UnitVector> states;
        std::vector<VmfParams> params;
        for (int i = 0; i < 256; ++i) {
            states.push_back(sample_uniform_sphere(d, rng));
            params.emplace_back(states.back(), o.kappa);
        }
        const ExactIndex exact(set);
        ApproxIndex approx(set, ApproxConfig{clusters, std::min(o.probes, clusters), 10, 32, o.common.seed});

        // Recall is measured on the perturbed states vMF-exp actually queries with.
        std::vector<UnitVector> queries;
        std::vector<std::unordered_set<ActionId>> truth;
        for (int i = 0; i < 200; ++i) {
            queries.push_back(sample(params[static_cast<std::size_t>(i) % params.size()], rng));
            std::unordered_set<ActionId> ids;
            for (const auto& r : exact.top_k(queries.back(), k)) ids.insert(r.id);
            truth.push_back(std::move(ids));
        }
        auto recall = [&] {
            double sum = 0.0;
            for (std::size_t q = 0; q < queries.size(); ++q) {
                std::size_t found = 0;
                for (const auto& r : approx.top_k(queries[q], k)) found += truth[q].count(r.id);
                sum += static_cast<double>(found) / static_cast<double>(k);
            }
            return sum / static_cast<double>(queries.size());
        };
        std::size_t probes = approx.probes();
        double achieved = recall();
        while (achieved < o.target_recall && probes < clusters) {
            probes = std::min(clusters, std::max(probes + 1, static_cast<std::size_t>(std::ceil(probes * 1.25))));
            approx.set_probes(probes);
            achieved = recall();
        }
        if (achieved < o.target_recall) {
            err << "warning: n=" << n << " recall@10 " << achieved << " below target with all lists probed\n";
        }

        auto pick = [&](std::uint64_t i) { return static_cast<std::size_t>(i % states.size()); };
        const double bexp = draws_per_second(o.budget_seconds, [&](std::uint64_t i) {
            return sample_boltzmann(*set, states[pick(i)], o.kappa, rng).id;
        });
        const double vmf_exact = draws_per_second(o.budget_seconds, [&](std::uint64_t i) {
            return sample_vmf_exp(exact, params[pick(i)], rng).id;
        });
        const double vmf_approx = draws_per_second(o.budget_seconds, [&](std::uint64_t i) {
            return sample_vmf_exp(approx, params[pick(i)], rng).id;
        });
        table.rows.push_back({n, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(clusters),
                              static_cast<std::uint64_t>(probes), achieved, bexp, vmf_exact, vmf_approx,
                              vmf_approx / bexp});
    }
    return table;
}

// ---------------------------------------------------------------- diversity

struct DiversityOptions {
    std::vector<std::string> n_grid = {"100000"};
    int d = 25;
    std::string embeddings;
    std::string limit;
    std::optional<double> kappa;
    std::size_t m = 500;
    std::size_t length = 40;
    std::size_t repetitions = 10;
    std::size_t seed_actions = 20;
    CommonOptions common;
};

void setup_diversity(CLI::App& app, DiversityOptions& o) {
    auto* cmd = app.add_subcommand("diversity", "Playlist diversity: vMF-exp vs TB-exp vs shuffled top-m");
    cmd->add_option("--n-grid", o.n_grid, "Synthetic set sizes")->delimiter(',');
    cmd->add_option("--d", o.d, "Dimension of the synthetic sets")->capture_default_str();
    cmd->add_option("--embeddings", o.embeddings, "Use this corpus instead of synthetic sets");
    cmd->add_option("--limit", o.limit, "Read at most this many vectors");
    cmd->add_option("--kappa", o.kappa,
                    "Concentration for both policies (default: estimated from each seed's top-m)");
    cmd->add_option("--m", o.m, "Candidate pool of TB-exp and the reference")->capture_default_str();
    cmd->add_option("--length", o.length, "Playlist length")->capture_default_str();
    cmd->add_option("--repetitions", o.repetitions, "Playlists per seed action and policy")->capture_default_str();
    cmd->add_option("--seed-actions", o.seed_actions, "Seed actions per set")->capture_default_str();
    add_common(cmd, o.common, true);
}

struct SeedResult {
    double kappa = 0.0;
    double vmf = 0.0;
    double tb = 0.0;
    double reference = 0.0;
};

Table cmd_diversity(const DiversityOptions& o, std::ostream& err) {
    check_workers(o.common);
    if (o.length < 1) throw UsageError("--length must be >= 1");
    if (o.m < o.length) throw UsageError("--m must be >= --length");
    if (o.repetitions < 2) throw UsageError("--repetitions must be >= 2");
    if (o.seed_actions < 1) throw UsageError("--seed-actions must be >= 1");
    if (o.kappa && (!std::isfinite(*o.kappa) || *o.kappa < 0.0)) throw UsageError("--kappa must be >= 0");
    if (o.d < 2) throw UsageError("--d must be >= 2");

    std::vector<std::shared_ptr<const EmbeddingSet>> sets;
    if (!o.embeddings.empty()) {
        sets.push_back(load_corpus(o.embeddings, o.limit.empty() ? std::nullopt
                                                                 : std::optional(parse_count(o.limit, "--limit")),
                                   err));
    } else {
        for (auto n : parse_counts(o.n_grid, "--n-grid")) {
            if (n < o.m) throw UsageError("--n-grid values must be >= --m");
            sets.push_back(synthetic_uniform(n, o.d, o.common.seed));
        }
    }

    Table table{{"n", "d", "m", "length", "repetitions", "seed_actions", "kappa", "jaccard_vmf", "jaccard_tb",
                 "jaccard_random", "ratio_tb_vmf"},
                {}};
    for (const auto& set : sets) {
        const std::size_t n = set->size();
        if (n < o.m) throw UsageError("--m exceeds the number of vectors");
        const ExactIndex index(set);
        const auto results = parallel_map<SeedResult>(o.seed_actions, o.common.workers, [&](std::uint64_t s) {
            RandomSource rng(o.common.seed, stream_key({kTagDiversity, n, s}));
            const ActionId seed_action = set->id(rng.below(n));
            SeedResult r;
            if (o.kappa) {
                r.kappa = *o.kappa;
            } else {
                std::vector<UnitVector> neighbors;
                for (const auto& nb : index.top_k(set->vector_of(seed_action), o.m)) {
                    neighbors.push_back(set->vector_of(nb.id));
                }
                r.kappa = estimate_kappa(neighbors);
            }
            auto diversity = [&](PolicyKind kind) {
                const PolicyConfig policy{kind, r.kappa, 0.0, o.m};
                std::vector<std::vector<ActionId>> playlists;
                for (std::size_t rep = 0; rep < o.repetitions; ++rep) {
                    playlists.push_back(generate_playlist(*set, index, seed_action, policy, o.length, rng));
                }
                return jaccard_diversity(playlists);
            };
            r.vmf = diversity(PolicyKind::vmf);
            r.tb = diversity(PolicyKind::truncated_boltzmann);
            r.reference = diversity(PolicyKind::random);
            return r;
        });
        SeedResult mean;
        for (const auto& r : results) {
            mean.kappa += r.kappa;
            mean.vmf += r.vmf;
            mean.tb += r.tb;
            mean.reference += r.reference;
        }
        const auto count = static_cast<double>(results.size());
        mean.kappa /= count;
        mean.vmf /= count;
        mean.tb /= count;
        mean.reference /= count;
        table.rows.push_back({static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(set->dim()),
                              static_cast<std::uint64_t>(o.m), static_cast<std::uint64_t>(o.length),
                              static_cast<std::uint64_t>(o.repetitions), static_cast<std::uint64_t>(o.seed_actions),
                              mean.kappa, mean.vmf, mean.tb, mean.reference,
                              mean.vmf > 0.0 ? Cell(mean.tb / mean.vmf) : Cell(std::monostate{})});
    }
    return table;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"vMF exploration experiments"};
    app.require_subcommand(1);
    SimulateOptions simulate;
    RealdataOptions realdata;
    BenchOptions bench;
    DiversityOptions diversity;
    setup_simulate(app, simulate);
    setup_realdata(app, realdata);
    setup_bench(app, bench);
    setup_diversity(app, diversity);

    std::vector<const char*> argv{"vmfexp"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        Table table;
        CommonOptions* common = nullptr;
        if (app.got_subcommand("simulate")) {
            table = cmd_simulate(simulate);
            common = &simulate.common;
        } else if (app.got_subcommand("realdata")) {
            table = cmd_realdata(realdata, err);
            common = &realdata.common;
        } else if (app.got_subcommand("bench")) {
            table = cmd_bench(bench, err);
            common = &bench.common;
        } else {
            table = cmd_diversity(diversity, err);
            common = &diversity.common;
        }
        emit(table, *common, out);
        return 0;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 4;
    }
}

}  // namespace vmfexp::cli
