#pragma once

/// Command implementations behind the `mpfh` tool: analytic sweeps,
/// simulation sweeps with replications, and codec self-checks, all emitting
/// one CSV schema:
///
///     # mpfh <version> scenario=<hex64> seed=<u64> source=<...> lambda_eff=<...>
///     sweep_var,sweep_value,service,metric,value,ci_low,ci_high,source
///
/// Rows are RFC-4180 quoted and emitted in deterministic order regardless
/// of how many worker threads computed them.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "mpfh/analytic.hpp"
#include "mpfh/codec.hpp"
#include "mpfh/errors.hpp"
#include "mpfh/rng.hpp"
#include "mpfh/scenario.hpp"
#include "mpfh/sim.hpp"
#include "mpfh/version.hpp"

namespace mpfh::cli {

// -- lambda_eff policies -----------------------------------------------------

/// Which arrival rate enters the reliability formulas' per-path exponent.
/// The isolated-frame reading corresponds to Zero; PerService keeps the
/// service's own rate; Aggregate charges the combined rate of all services.
enum class LambdaEffPolicy { PerService, Aggregate, Zero };

inline std::string to_string(LambdaEffPolicy p) {
    switch (p) {
        case LambdaEffPolicy::PerService: return "per-service";
        case LambdaEffPolicy::Aggregate:  return "aggregate";
        case LambdaEffPolicy::Zero:       return "zero";
    }
    return "?";
}

inline LambdaEffPolicy parse_policy(const std::string& s) {
    if (s == "per-service") return LambdaEffPolicy::PerService;
    if (s == "aggregate") return LambdaEffPolicy::Aggregate;
    if (s == "zero") return LambdaEffPolicy::Zero;
    throw DomainError("lambda-eff policy must be per-service, aggregate or zero, got '" + s +
                      "'");
}

inline double lambda_eff_for(const Scenario& sc, std::size_t service, LambdaEffPolicy policy) {
    switch (policy) {
        case LambdaEffPolicy::Zero:
            return 0.0;
        case LambdaEffPolicy::PerService:
            return sc.services[service].traffic.arrival_rate;
        case LambdaEffPolicy::Aggregate: {
            double sum = 0.0;
            for (const auto& svc : sc.services) sum += svc.traffic.arrival_rate;
            return sum;
        }
    }
    return 0.0;
}

// -- sweep specs --------------------------------------------------------------

enum class SweepVariable { None, SplitFactorK, EmbbBandwidthFraction, EmbbPathCount, DeadlineT };

inline std::string to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::None:                  return "none";
        case SweepVariable::SplitFactorK:          return "split_factor_k";
        case SweepVariable::EmbbBandwidthFraction: return "embb_bandwidth_fraction";
        case SweepVariable::EmbbPathCount:         return "embb_path_count";
        case SweepVariable::DeadlineT:             return "deadline_t";
    }
    return "?";
}

struct SweepSpec {
    SweepVariable variable = SweepVariable::None;
    std::vector<double> values;

    bool empty() const { return variable == SweepVariable::None; }
};

/// Parse "var=v1,v2,..." or "var=start:stop[:count]". Integer variables
/// default to step-1 grids when the count is omitted.
inline SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw DomainError("sweep spec must look like var=values, got '" + text + "'");
    const std::string name = text.substr(0, eq);
    const std::string rest = text.substr(eq + 1);

    SweepSpec spec;
    if (name == "split_factor_k" || name == "k")
        spec.variable = SweepVariable::SplitFactorK;
    else if (name == "embb_bandwidth_fraction")
        spec.variable = SweepVariable::EmbbBandwidthFraction;
    else if (name == "embb_path_count")
        spec.variable = SweepVariable::EmbbPathCount;
    else if (name == "deadline_t" || name == "t")
        spec.variable = SweepVariable::DeadlineT;
    else
        throw DomainError("unknown sweep variable '" + name + "'");

    const bool integral = spec.variable == SweepVariable::SplitFactorK ||
                          spec.variable == SweepVariable::EmbbPathCount;

    const auto to_num = [&](const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw DomainError("bad number '" + s + "' in sweep spec");
        return v;
    };

    if (rest.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (true) {
            const auto colon = rest.find(':', pos);
            parts.push_back(rest.substr(pos, colon - pos));
            if (colon == std::string::npos) break;
            pos = colon + 1;
        }
        if (parts.size() < 2 || parts.size() > 3)
            throw DomainError("grid sweep must be start:stop[:count]");
        const double start = to_num(parts[0]);
        const double stop = to_num(parts[1]);
        long count;
        if (parts.size() == 3) {
            count = static_cast<long>(to_num(parts[2]));
        } else if (integral) {
            count = static_cast<long>(stop - start) + 1;
        } else {
            throw DomainError("non-integer grid sweep needs an explicit count");
        }
        if (count < 1) throw DomainError("sweep count must be >= 1");
        for (long i = 0; i < count; ++i)
            spec.values.push_back(count == 1
                                      ? start
                                      : start + (stop - start) * static_cast<double>(i) /
                                            static_cast<double>(count - 1));
    } else {
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const auto comma = rest.find(',', pos);
            spec.values.push_back(to_num(rest.substr(pos, comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (spec.values.empty()) throw DomainError("sweep values must be nonempty");
    return spec;
}

inline std::size_t find_embb_service(const Scenario& sc) {
    for (std::size_t i = 0; i < sc.services.size(); ++i) {
        std::string lower = sc.services[i].name;
        for (char& c : lower) c = static_cast<char>(std::tolower(c));
        if (lower.find("embb") != std::string::npos) return i;
    }
    throw ConfigError("this sweep needs a service whose name contains 'eMBB'");
}

/// A scenario specialized to one sweep point. DeadlineT leaves the scenario
/// untouched (the deadline itself is the swept quantity).
inline Scenario apply_sweep_point(const Scenario& base, SweepVariable variable, double value) {
    Scenario sc = base;
    switch (variable) {
        case SweepVariable::None:
        case SweepVariable::DeadlineT:
            return sc;
        case SweepVariable::SplitFactorK: {
            const int k = static_cast<int>(value);
            for (auto& svc : sc.services) svc.strategy = StrategyParams::coded(k);
            break;
        }
        case SweepVariable::EmbbBandwidthFraction: {
            if (sc.services.size() != 2)
                throw ConfigError("embb_bandwidth_fraction sweep needs exactly two services");
            const std::size_t e = find_embb_service(sc);
            sc.allocation.kind = AllocationKind::BandwidthSplit;
            sc.allocation.path_counts.clear();
            sc.allocation.bandwidth_fractions.assign(2, 0.0);
            sc.allocation.bandwidth_fractions[e] = value;
            sc.allocation.bandwidth_fractions[1 - e] = 1.0 - value;
            break;
        }
        case SweepVariable::EmbbPathCount: {
            if (sc.services.size() != 2)
                throw ConfigError("embb_path_count sweep needs exactly two services");
            const std::size_t e = find_embb_service(sc);
            sc.allocation.kind = AllocationKind::PathSplit;
            sc.allocation.bandwidth_fractions.clear();
            sc.allocation.path_counts.assign(2, 0);
            sc.allocation.path_counts[e] = static_cast<int>(value);
            sc.allocation.path_counts[1 - e] = sc.paths.path_count - static_cast<int>(value);
            break;
        }
    }
    try {
        sc.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("sweep point invalid: ") + e.what());
    }
    return sc;
}

// -- CSV ----------------------------------------------------------------------

inline constexpr const char* kCsvColumns =
    "sweep_var,sweep_value,service,metric,value,ci_low,ci_high,source";

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const Scenario& sc, const std::string& source,
              const std::string& lambda_eff)
        : out_(out) {
        char hash[20];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(scenario::scenario_hash(sc)));
        out_ << "# mpfh " << kVersion << " scenario=" << hash << " seed=" << sc.seed
             << " source=" << source << " lambda_eff=" << lambda_eff << "\n";
        out_ << kCsvColumns << "\n";
    }

    void row(const std::string& sweep_var, const std::string& sweep_value,
             const std::string& service, const std::string& metric, const std::string& value,
             const std::string& ci_low, const std::string& ci_high, const std::string& source) {
        out_ << csv_quote(sweep_var) << ',' << csv_quote(sweep_value) << ','
             << csv_quote(service) << ',' << csv_quote(metric) << ',' << csv_quote(value) << ','
             << csv_quote(ci_low) << ',' << csv_quote(ci_high) << ',' << csv_quote(source)
             << "\n";
    }

private:
    std::ostream& out_;
};

// -- worker pool ---------------------------------------------------------------

namespace detail {

/// Run fn(0..count-1) across hardware threads; exceptions are rethrown in
/// index order once all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    if (count == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const std::size_t workers = std::min<std::size_t>(hw, count);
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            threads.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& t : threads) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

// -- analyze -------------------------------------------------------------------

struct AnalyzeOptions {
    SweepSpec sweep;
    std::vector<double> deadlines;
    LambdaEffPolicy policy = LambdaEffPolicy::PerService;
};

/// Closed-form curves: one mean-latency row per (sweep point, service) plus
/// one error-probability row per requested deadline. A deadline_t sweep
/// emits error-probability rows directly against the swept deadline.
inline void cmd_analyze(const Scenario& scenario, const AnalyzeOptions& options,
                        std::ostream& out) {
    scenario.validate();
    CsvWriter csv(out, scenario, "analytic", to_string(options.policy));
    const std::string var = to_string(options.sweep.variable);
    const std::vector<double> points = options.sweep.empty()
                                           ? std::vector<double>{0.0}
                                           : options.sweep.values;

    for (const double point : points) {
        const Scenario sc = apply_sweep_point(scenario, options.sweep.variable, point);
        const auto alloc = sim::apply_allocation(sc);
        const std::string sweep_value =
            options.sweep.empty() ? std::string() : format_double(point);
        for (std::size_t s = 0; s < sc.services.size(); ++s) {
            const auto& svc = sc.services[s];
            const double lambda_eff = lambda_eff_for(sc, s, options.policy);
            if (options.sweep.variable == SweepVariable::DeadlineT) {
                const double err = analytic::error_probability(point, svc.traffic,
                                                               alloc[s].paths, svc.strategy,
                                                               lambda_eff);
                csv.row(var, sweep_value, svc.name, "error_prob", format_double(err), "", "",
                        "analytic");
                continue;
            }
            const double latency = analytic::mean_latency(svc.traffic, alloc[s].paths,
                                                          svc.strategy);
            csv.row(var, sweep_value, svc.name, "mean_latency_s", format_double(latency), "",
                    "", "analytic");
            for (const double t : options.deadlines) {
                const double err = analytic::error_probability(t, svc.traffic, alloc[s].paths,
                                                               svc.strategy, lambda_eff);
                csv.row(var, sweep_value, svc.name, "error_prob@" + format_double(t),
                        format_double(err), "", "", "analytic");
            }
        }
    }
}

// -- simulate ------------------------------------------------------------------

struct SimulateOptions {
    SweepSpec sweep;
    std::vector<double> deadlines;
    int replications = 0;  ///< 0: take the scenario's replication count
};

/// Simulation sweeps. Replication r runs with seed base_seed + r; sweep
/// points and replications execute in parallel and rows are emitted in
/// deterministic order. Per-point rows aggregate the replications
/// (mean-of-means CI across replications when there are several); a
/// sweep-free invocation also emits one mean-latency row per replication.
inline void cmd_simulate(const Scenario& scenario, const SimulateOptions& options,
                         std::ostream& out) {
    try {
        scenario.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    const int reps = options.replications > 0 ? options.replications : scenario.replications;
    if (reps < 1) throw ConfigError("replications must be >= 1");
    if (options.sweep.variable == SweepVariable::DeadlineT)
        throw ConfigError("deadline_t sweeps apply to analyze; pass --deadlines to simulate");

    CsvWriter csv(out, scenario, "sim", "none");
    const std::string var = to_string(options.sweep.variable);
    const std::vector<double> points = options.sweep.empty()
                                           ? std::vector<double>{0.0}
                                           : options.sweep.values;

    struct Task {
        Scenario scenario;
        std::size_t point = 0;
        int rep = 0;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < points.size(); ++p) {
        const Scenario point_sc = apply_sweep_point(scenario, options.sweep.variable, points[p]);
        for (int r = 0; r < reps; ++r) {
            Task task{point_sc, p, r};
            task.scenario.seed = scenario.seed + static_cast<uint64_t>(r);
            tasks.push_back(std::move(task));
        }
    }

    std::vector<sim::SimResult> results(tasks.size());
    detail::parallel_for(tasks.size(), [&](std::size_t i) { results[i] = sim::run(tasks[i].scenario); });

    for (std::size_t p = 0; p < points.size(); ++p) {
        const std::string sweep_value =
            options.sweep.empty() ? std::string() : format_double(points[p]);
        const sim::SimResult& first = results[p * reps];
        for (std::size_t s = 0; s < first.services.size(); ++s) {
            const std::string& name = first.services[s].name;

            std::vector<double> rep_means;
            uint64_t offered = 0, delivered = 0;
            for (int r = 0; r < reps; ++r) {
                const auto& svc = results[p * reps + r].services[s];
                offered += svc.offered;
                delivered += svc.delivered;
                if (svc.delivered > 0) rep_means.push_back(svc.summary.mean);
            }

            if (!rep_means.empty()) {
                double mean = 0.0;
                for (const double m : rep_means) mean += m;
                mean /= static_cast<double>(rep_means.size());
                double lo = mean, hi = mean;
                if (rep_means.size() > 1) {
                    double var_acc = 0.0;
                    for (const double m : rep_means) var_acc += (m - mean) * (m - mean);
                    var_acc /= static_cast<double>(rep_means.size() - 1);
                    const double half =
                        stats::student_t_quantile(0.975,
                                                  static_cast<int>(rep_means.size()) - 1) *
                        std::sqrt(var_acc / static_cast<double>(rep_means.size()));
                    lo = mean - half;
                    hi = mean + half;
                } else {
                    const auto& sum = first.services[s].summary;
                    lo = sum.mean - sum.ci_half_width;
                    hi = sum.mean + sum.ci_half_width;
                }
                csv.row(var, sweep_value, name, "mean_latency_s", format_double(mean),
                        format_double(lo), format_double(hi), "sim");
            }
            csv.row(var, sweep_value, name, "offered", std::to_string(offered), "", "", "sim");
            csv.row(var, sweep_value, name, "delivered", std::to_string(delivered), "", "",
                    "sim");

            for (const double t : options.deadlines) {
                uint64_t ok = 0, trials = 0;
                for (int r = 0; r < reps; ++r) {
                    const auto& svc = results[p * reps + r].services[s];
                    const auto& sorted = svc.sorted_latencies;
                    ok += std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
                    trials += svc.offered;
                }
                if (trials == 0) continue;
                const stats::Interval iv = stats::wilson_interval(ok, trials, 0.95);
                const double err = 1.0 - static_cast<double>(ok) / static_cast<double>(trials);
                csv.row(var, sweep_value, name, "error_prob@" + format_double(t),
                        format_double(err), format_double(1.0 - iv.high),
                        format_double(1.0 - iv.low), "sim");
            }
        }
    }

    if (options.sweep.empty()) {
        for (int r = 0; r < reps; ++r)
            for (std::size_t s = 0; s < results[r].services.size(); ++s) {
                const auto& svc = results[r].services[s];
                if (svc.delivered == 0) continue;
                csv.row("replication", std::to_string(r), svc.name, "mean_latency_s",
                        format_double(svc.summary.mean),
                        format_double(svc.summary.mean - svc.summary.ci_half_width),
                        format_double(svc.summary.mean + svc.summary.ci_half_width), "sim");
            }
    }
}

// -- codec check -----------------------------------------------------------------

/// Exhaustive any-k-of-n recovery check for one geometry over `trials`
/// random frames. Geometries with more than `max_subsets` k-subsets fall
/// back to that many random subsets per frame.
inline bool cmd_codec_check(int n, int k, int trials, std::ostream& out, uint64_t seed = 1,
                            bool dump = false, std::size_t max_subsets = 200000) {
    const codec::CodeGeometry geometry{n, k};
    geometry.validate();
    if (trials < 1) throw DomainError("codec check: trials must be >= 1");
    const codec::BlockCodec codec(geometry);
    rng::Stream stream(seed, "codec-check");

    uint64_t checked = 0, failures = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t len = 1 + stream.next_below(64);
        std::vector<uint8_t> frame(len);
        stream.fill_bytes(frame.data(), frame.size());
        const auto blocks = codec.encode(frame, static_cast<uint64_t>(trial));

        if (dump && trial == 0) {
            out << "# wire dump, block 0:";
            for (const uint8_t b : codec::serialize_block(blocks[0])) {
                char hex[4];
                std::snprintf(hex, sizeof(hex), " %02x", b);
                out << hex;
            }
            out << "\n";
        }

        // enumerate k-subsets of 0..n-1 unless that explodes
        std::vector<int> subset(k);
        for (int i = 0; i < k; ++i) subset[i] = i;
        double total = 1.0;
        for (int i = 0; i < k; ++i) total = total * (n - i) / (i + 1);
        const bool exhaustive = total <= static_cast<double>(max_subsets);

        const auto check_subset = [&](const std::vector<int>& idx) {
            std::vector<codec::CodedBlock> received;
            received.reserve(idx.size());
            for (const int i : idx) received.push_back(blocks[i]);
            ++checked;
            if (codec.decode(received) != frame) ++failures;
        };

        if (exhaustive) {
            for (;;) {
                check_subset(subset);
                int i = k - 1;
                while (i >= 0 && subset[i] == n - k + i) --i;
                if (i < 0) break;
                ++subset[i];
                for (int j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
            }
        } else {
            for (std::size_t draw = 0; draw < max_subsets; ++draw) {
                std::vector<int> pool(n);
                for (int i = 0; i < n; ++i) pool[i] = i;
                for (int i = 0; i < k; ++i)
                    std::swap(pool[i], pool[i + stream.next_below(n - i)]);
                pool.resize(k);
                check_subset(pool);
            }
        }
    }
    out << "codec-check n=" << n << " k=" << k << " trials=" << trials
        << " subsets_checked=" << checked << " failures=" << failures << " "
        << (failures == 0 ? "PASS" : "FAIL") << "\n";
    return failures == 0;
}

}  // namespace mpfh::cli
