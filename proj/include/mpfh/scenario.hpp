#pragma once

/// Experiment configuration: the scenario value, its line-oriented config
/// grammar, and the built-in presets.
///
/// Grammar (see also the annotated files under scenarios/):
///
///     # comment to end of line
///     [paths]
///     n = 10                    # number of parallel paths
///     capacity_bps = 100000000  # bits per second, per path
///
///     [[service]]               # one block per service, order matters
///     name = eMBB
///     arrival_per_ms = 8        # frames per millisecond
///     frame_bytes = 1500
///     strategy = mpc            # sp | mpd | mpc
///     k = 2                     # split factor, required iff strategy = mpc
///
///     [allocation]              # optional; defaults to kind = shared
///     kind = shared             # shared | bandwidth_split | path_split
///     # fractions = 0.2, 0.8    # bandwidth_split: one fraction per service
///     # path_counts = 2, 8      # path_split: paths per service, sums to n
///
///     [sim]
///     duration_s = 10
///     warmup_s = 0.5            # default 0
///     seed = 12345              # default 1
///     cancellation = cancel_on_complete   # | no_cancel (default cancel_on_complete)
///     replications = 1          # default 1
///
/// Keys take the units a config author has at hand (bytes, frames per
/// millisecond, bits per second); parsing converts to bits and seconds.
/// Unknown sections or keys are fatal: a typo must not silently change an
/// experiment.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mpfh/errors.hpp"
#include "mpfh/rng.hpp"
#include "mpfh/types.hpp"

namespace mpfh {

enum class AllocationKind { Shared, BandwidthSplit, PathSplit };

/// How two (or more) services share the path bundle.
struct CoexistenceAllocation {
    AllocationKind kind = AllocationKind::Shared;
    std::vector<double> bandwidth_fractions;  ///< per service, BandwidthSplit only
    std::vector<int> path_counts;             ///< per service, PathSplit only

    bool operator==(const CoexistenceAllocation&) const = default;
};

enum class CancellationMode {
    CancelOnComplete,  ///< in-flight siblings removed the instant a frame completes
    NoCancel,          ///< siblings occupy resources to the end and are then dropped
};

struct ServiceSpec {
    std::string name;
    TrafficSpec traffic;
    StrategyParams strategy;

    bool operator==(const ServiceSpec&) const = default;
};

struct Scenario {
    PathConfig paths;
    std::vector<ServiceSpec> services;
    CoexistenceAllocation allocation;
    CancellationMode cancellation = CancellationMode::CancelOnComplete;
    double sim_duration = 0.0;  ///< seconds
    double warmup = 0.0;        ///< seconds, excluded from measurements
    uint64_t seed = 1;
    int replications = 1;
    std::string rng_streams = rng::kStreamDerivation;

    bool operator==(const Scenario&) const = default;

    /// Paths available to service `i` under the allocation.
    int allocated_path_count(std::size_t i) const {
        return allocation.kind == AllocationKind::PathSplit ? allocation.path_counts[i]
                                                            : paths.path_count;
    }

    /// Per-path capacity seen by service `i` under the allocation.
    double allocated_capacity(std::size_t i) const {
        return allocation.kind == AllocationKind::BandwidthSplit
                   ? allocation.bandwidth_fractions[i] * paths.capacity
                   : paths.capacity;
    }

    void validate() const {
        paths.validate();
        if (services.empty()) throw ValidationError("service", "at least one service required");
        std::set<std::string> names;
        for (const auto& svc : services) {
            if (svc.name.empty()) throw ValidationError("name", "service name must be nonempty");
            if (!names.insert(svc.name).second)
                throw ValidationError("name", "duplicate service name: " + svc.name);
            try {
                svc.traffic.validate();
            } catch (const DomainError& e) {
                throw ValidationError(svc.name, e.what());
            }
        }
        switch (allocation.kind) {
            case AllocationKind::Shared:
                if (!allocation.bandwidth_fractions.empty() || !allocation.path_counts.empty())
                    throw ValidationError("kind", "shared allocation takes no parameters");
                break;
            case AllocationKind::BandwidthSplit: {
                if (allocation.bandwidth_fractions.size() != services.size())
                    throw ValidationError("fractions", "need one fraction per service");
                double sum = 0.0;
                for (const double f : allocation.bandwidth_fractions) {
                    if (!(f > 0.0 && f < 1.0))
                        throw ValidationError("fractions", "each fraction must be in (0, 1)");
                    sum += f;
                }
                if (sum > 1.0 + 1e-9)
                    throw ValidationError("fractions", "fractions sum to " + std::to_string(sum) +
                                                           " > 1");
                break;
            }
            case AllocationKind::PathSplit: {
                if (allocation.path_counts.size() != services.size())
                    throw ValidationError("path_counts", "need one path count per service");
                int sum = 0;
                for (const int c : allocation.path_counts) {
                    if (c < 1)
                        throw ValidationError("path_counts", "each path count must be >= 1");
                    sum += c;
                }
                if (sum != paths.path_count)
                    throw ValidationError("path_counts",
                                          "path counts sum to " + std::to_string(sum) +
                                              ", expected n = " + std::to_string(paths.path_count));
                break;
            }
        }
        for (std::size_t i = 0; i < services.size(); ++i) {
            const auto& svc = services[i];
            if (svc.strategy.kind == StrategyKind::Coded) {
                const int n_eff = allocated_path_count(i);
                if (svc.strategy.split_factor < 1 || svc.strategy.split_factor > n_eff)
                    throw ValidationError(
                        "k", "service " + svc.name + ": k = " +
                                 std::to_string(svc.strategy.split_factor) +
                                 " outside 1.." + std::to_string(n_eff) + " allocated paths");
            }
        }
        if (!(warmup >= 0.0)) throw ValidationError("warmup_s", "warmup must be >= 0");
        if (!(sim_duration > warmup))
            throw ValidationError("duration_s", "duration must exceed warmup");
        if (replications < 1) throw ValidationError("replications", "must be >= 1");
        if (rng_streams != rng::kStreamDerivation)
            throw ValidationError("rng_streams",
                                  "unsupported stream derivation: " + rng_streams);
    }
};

namespace scenario {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline double to_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || !std::isfinite(v))
        throw ValidationError(key, "not a number: '" + value + "'");
    return v;
}

inline long long to_int(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    if (v != std::floor(v)) throw ValidationError(key, "not an integer: '" + value + "'");
    return static_cast<long long>(v);
}

inline uint64_t to_u64(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw ValidationError(key, "not an unsigned integer: '" + value + "'");
    return v;
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

/// One section's key/value pairs with duplicate detection.
class KeyBag {
public:
    explicit KeyBag(std::string section) : section_(std::move(section)) {}

    void put(const std::string& key, const std::string& value, int line) {
        if (!entries_.emplace(key, value).second)
            throw ParseError("duplicate key '" + key + "' in [" + section_ + "]", line);
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string take(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            throw ValidationError(key, "missing required key in [" + section_ + "]");
        std::string v = it->second;
        entries_.erase(it);
        return v;
    }

    std::string take_or(const std::string& key, const std::string& fallback) {
        return has(key) ? take(key) : fallback;
    }

    void reject_leftovers() const {
        if (!entries_.empty())
            throw ValidationError(entries_.begin()->first,
                                  "unknown key in [" + section_ + "]");
    }

private:
    std::string section_;
    std::map<std::string, std::string> entries_;
};

inline StrategyParams parse_strategy(KeyBag& bag) {
    const std::string s = bag.take("strategy");
    if (s == "sp") {
        if (bag.has("k")) throw ValidationError("k", "k is only valid with strategy = mpc");
        return StrategyParams::single_path();
    }
    if (s == "mpd") {
        if (bag.has("k")) throw ValidationError("k", "k is only valid with strategy = mpc");
        return StrategyParams::duplication();
    }
    if (s == "mpc") return StrategyParams::coded(static_cast<int>(to_int("k", bag.take("k"))));
    throw ValidationError("strategy", "expected sp, mpd or mpc, got '" + s + "'");
}

}  // namespace detail

/// Parse a scenario document. Throws ParseError (with line number) for
/// malformed syntax and ValidationError (naming the key) for bad values;
/// the returned Scenario always passes Scenario::validate().
inline Scenario parse(const std::string& document) {
    using detail::KeyBag;
    KeyBag paths("paths"), allocation("allocation"), sim("sim");
    std::vector<KeyBag> services;
    bool saw_paths = false, saw_allocation = false, saw_sim = false;

    KeyBag* current = nullptr;
    std::istringstream in(document);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line == "[paths]") {
                if (saw_paths) throw ParseError("duplicate [paths] section", line_no);
                saw_paths = true;
                current = &paths;
            } else if (line == "[[service]]") {
                services.emplace_back("service");
                current = &services.back();
            } else if (line == "[allocation]") {
                if (saw_allocation) throw ParseError("duplicate [allocation] section", line_no);
                saw_allocation = true;
                current = &allocation;
            } else if (line == "[sim]") {
                if (saw_sim) throw ParseError("duplicate [sim] section", line_no);
                saw_sim = true;
                current = &sim;
            } else {
                throw ParseError("unknown section header: " + line, line_no);
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value', got: " + line, line_no);
        if (current == nullptr)
            throw ParseError("key/value pair before any section header", line_no);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError("empty key or value", line_no);
        current->put(key, value, line_no);
    }

    if (!saw_paths) throw ValidationError("paths", "missing [paths] section");
    if (services.empty()) throw ValidationError("service", "missing [[service]] section");
    if (!saw_sim) throw ValidationError("sim", "missing [sim] section");

    Scenario sc;
    {
        const long long n = detail::to_int("n", paths.take("n"));
        if (n < 1 || n > 100000) throw ValidationError("n", "path count out of range 1..100000");
        sc.paths.path_count = static_cast<int>(n);
        sc.paths.capacity = detail::to_double("capacity_bps", paths.take("capacity_bps"));
        if (!(sc.paths.capacity > 0.0))
            throw ValidationError("capacity_bps", "capacity must be > 0");
        paths.reject_leftovers();
    }

    for (auto& bag : services) {
        ServiceSpec svc;
        svc.name = bag.take("name");
        const double per_ms = detail::to_double("arrival_per_ms", bag.take("arrival_per_ms"));
        if (per_ms < 0.0) throw ValidationError("arrival_per_ms", "must be >= 0");
        svc.traffic.arrival_rate = per_ms * 1000.0;  // frames/ms -> frames/s
        const double bytes = detail::to_double("frame_bytes", bag.take("frame_bytes"));
        if (!(bytes > 0.0) || bytes != std::floor(bytes))
            throw ValidationError("frame_bytes", "must be a positive whole byte count");
        svc.traffic.frame_bits = bytes * 8.0;
        svc.strategy = detail::parse_strategy(bag);
        bag.reject_leftovers();
        sc.services.push_back(std::move(svc));
    }

    if (saw_allocation) {
        const std::string kind = allocation.take("kind");
        if (kind == "shared") {
            sc.allocation.kind = AllocationKind::Shared;
        } else if (kind == "bandwidth_split") {
            sc.allocation.kind = AllocationKind::BandwidthSplit;
            for (const auto& item : detail::split_list(allocation.take("fractions")))
                sc.allocation.bandwidth_fractions.push_back(detail::to_double("fractions", item));
        } else if (kind == "path_split") {
            sc.allocation.kind = AllocationKind::PathSplit;
            for (const auto& item : detail::split_list(allocation.take("path_counts")))
                sc.allocation.path_counts.push_back(
                    static_cast<int>(detail::to_int("path_counts", item)));
        } else {
            throw ValidationError("kind",
                                  "expected shared, bandwidth_split or path_split, got '" +
                                      kind + "'");
        }
        allocation.reject_leftovers();
    }

    {
        sc.sim_duration = detail::to_double("duration_s", sim.take("duration_s"));
        sc.warmup = detail::to_double("warmup_s", sim.take_or("warmup_s", "0"));
        sc.seed = detail::to_u64("seed", sim.take_or("seed", "1"));
        const std::string cancel = sim.take_or("cancellation", "cancel_on_complete");
        if (cancel == "cancel_on_complete")
            sc.cancellation = CancellationMode::CancelOnComplete;
        else if (cancel == "no_cancel")
            sc.cancellation = CancellationMode::NoCancel;
        else
            throw ValidationError("cancellation",
                                  "expected cancel_on_complete or no_cancel, got '" + cancel +
                                      "'");
        const long long reps = detail::to_int("replications", sim.take_or("replications", "1"));
        if (reps < 1) throw ValidationError("replications", "must be >= 1");
        sc.replications = static_cast<int>(reps);
        sc.rng_streams = sim.take_or("rng_streams", rng::kStreamDerivation);
        sim.reject_leftovers();
    }

    sc.validate();
    return sc;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Canonical document form; parse(serialize(s)) == s for any valid Scenario
/// whose boundary-unit values are exactly representable (all presets are).
inline std::string serialize(const Scenario& sc) {
    std::ostringstream out;
    out << "[paths]\n";
    out << "n = " << sc.paths.path_count << "\n";
    out << "capacity_bps = " << detail::fmt_double(sc.paths.capacity) << "\n";
    for (const auto& svc : sc.services) {
        out << "\n[[service]]\n";
        out << "name = " << svc.name << "\n";
        out << "arrival_per_ms = " << detail::fmt_double(svc.traffic.arrival_rate / 1000.0)
            << "\n";
        out << "frame_bytes = " << detail::fmt_double(svc.traffic.frame_bits / 8.0) << "\n";
        out << "strategy = " << to_string(svc.strategy.kind) << "\n";
        if (svc.strategy.kind == StrategyKind::Coded)
            out << "k = " << svc.strategy.split_factor << "\n";
    }
    out << "\n[allocation]\n";
    switch (sc.allocation.kind) {
        case AllocationKind::Shared:
            out << "kind = shared\n";
            break;
        case AllocationKind::BandwidthSplit: {
            out << "kind = bandwidth_split\n";
            out << "fractions = ";
            for (std::size_t i = 0; i < sc.allocation.bandwidth_fractions.size(); ++i)
                out << (i ? ", " : "")
                    << detail::fmt_double(sc.allocation.bandwidth_fractions[i]);
            out << "\n";
            break;
        }
        case AllocationKind::PathSplit: {
            out << "kind = path_split\n";
            out << "path_counts = ";
            for (std::size_t i = 0; i < sc.allocation.path_counts.size(); ++i)
                out << (i ? ", " : "") << sc.allocation.path_counts[i];
            out << "\n";
            break;
        }
    }
    out << "\n[sim]\n";
    out << "duration_s = " << detail::fmt_double(sc.sim_duration) << "\n";
    out << "warmup_s = " << detail::fmt_double(sc.warmup) << "\n";
    out << "seed = " << sc.seed << "\n";
    out << "cancellation = "
        << (sc.cancellation == CancellationMode::CancelOnComplete ? "cancel_on_complete"
                                                                  : "no_cancel")
        << "\n";
    out << "replications = " << sc.replications << "\n";
    out << "rng_streams = " << sc.rng_streams << "\n";
    return out.str();
}

/// FNV-1a hash of the canonical document; stamped into CSV output headers.
inline uint64_t scenario_hash(const Scenario& sc) { return rng::fnv1a64(serialize(sc)); }

namespace detail {

inline std::string table1_services(const std::string& which) {
    std::string out;
    if (which == "embb" || which == "both")
        out +=
            "[[service]]\n"
            "name = eMBB\n"
            "arrival_per_ms = 8\n"
            "frame_bytes = 1500\n"
            "strategy = mpc\n"
            "k = 2\n";
    if (which == "urllc" || which == "both")
        out +=
            "[[service]]\n"
            "name = URLLC\n"
            "arrival_per_ms = 24\n"
            "frame_bytes = 500\n"
            "strategy = mpc\n"
            "k = 2\n";
    return out;
}

inline std::string preset_document(const std::string& name) {
    const std::string paths =
        "[paths]\n"
        "n = 10\n"
        "capacity_bps = 100000000\n";
    const std::string sim =
        "[sim]\n"
        "duration_s = 10\n"
        "warmup_s = 0.5\n"
        "seed = 12345\n"
        "cancellation = cancel_on_complete\n"
        "replications = 1\n";
    if (name == "table1-shared")
        return paths + table1_services("both") + "[allocation]\nkind = shared\n" + sim;
    if (name == "table1-bw-split-1-5")
        return paths + table1_services("both") +
               "[allocation]\nkind = bandwidth_split\nfractions = 0.2, 0.8\n" + sim;
    if (name == "table1-path-split-2-8")
        return paths + table1_services("both") +
               "[allocation]\nkind = path_split\npath_counts = 2, 8\n" + sim;
    if (name == "embb-only")
        return paths + table1_services("embb") + "[allocation]\nkind = shared\n" + sim;
    if (name == "urllc-only")
        return paths + table1_services("urllc") + "[allocation]\nkind = shared\n" + sim;
    throw UnknownPresetError("unknown preset: " + name +
                             " (expected table1-shared, table1-bw-split-1-5, "
                             "table1-path-split-2-8, embb-only or urllc-only)");
}

}  // namespace detail

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "table1-shared", "table1-bw-split-1-5", "table1-path-split-2-8", "embb-only",
        "urllc-only"};
    return names;
}

/// Built-in experiment presets; every preset parses and validates.
inline Scenario preset(const std::string& name) {
    return parse(detail::preset_document(name));
}

}  // namespace scenario
}  // namespace mpfh
