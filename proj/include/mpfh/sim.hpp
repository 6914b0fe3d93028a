#pragma once

/// Discrete-event simulation of the multi-path transport pipeline:
/// Poisson frame arrivals -> per-strategy fan-out -> parallel FIFO
/// single-server queues with exponential service -> k-of-n (or first-copy)
/// completion at the receiving unit.
///
/// Coded transport runs the real erasure codec end to end: every frame's
/// bytes are encoded at arrival, and on completion the first k received
/// blocks are decoded and compared against the original. Service-time draws
/// use the exact fractional block size B/k bits; byte padding affects only
/// payload content, never timing.
///
/// A run is strictly single-threaded and deterministic: identical
/// (scenario, seed) pairs produce identical results. Randomness comes from
/// counter-based streams derived per arrival process, per payload source
/// and per queue, so one stream's values never depend on event
/// interleaving. Simultaneous events fire in creation order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <deque>
#include <memory>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpfh/analytic.hpp"
#include "mpfh/codec.hpp"
#include "mpfh/errors.hpp"
#include "mpfh/rng.hpp"
#include "mpfh/scenario.hpp"
#include "mpfh/stats.hpp"

namespace mpfh::sim {

/// What one service sees of the path bundle after coexistence allocation.
struct ServiceAllocation {
    PathConfig paths;              ///< allocated path count and per-path capacity
    std::vector<int> path_indices; ///< physical paths carrying this service
};

/// Resolve the scenario's coexistence allocation:
///   shared           -> every service sees all n paths at capacity c
///   bandwidth_split  -> all n paths at fraction * c, independent queues
///   path_split       -> a dedicated slice of paths at full capacity
inline std::vector<ServiceAllocation> apply_allocation(const Scenario& sc) {
    try {
        sc.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    std::vector<ServiceAllocation> out(sc.services.size());
    int next_path = 0;
    for (std::size_t s = 0; s < sc.services.size(); ++s) {
        ServiceAllocation& a = out[s];
        a.paths.path_count = sc.allocated_path_count(s);
        a.paths.capacity = sc.allocated_capacity(s);
        if (sc.allocation.kind == AllocationKind::PathSplit) {
            for (int p = 0; p < a.paths.path_count; ++p) a.path_indices.push_back(next_path + p);
            next_path += a.paths.path_count;
        } else {
            for (int p = 0; p < sc.paths.path_count; ++p) a.path_indices.push_back(p);
        }
    }
    return out;
}

struct ServiceResult {
    std::string name;
    uint64_t offered = 0;      ///< arrivals inside the measurement window
    uint64_t delivered = 0;    ///< completed by the end of the run
    uint64_t undelivered = 0;  ///< offered - delivered (in flight at the end)
    uint64_t to_ru1 = 0;       ///< destination tallies over offered frames
    uint64_t to_ru2 = 0;
    uint64_t decode_mismatches = 0;  ///< decoded bytes differing from the original

    /// Delivery-ordered samples (seconds); arrivals[i] is the arrival time
    /// of the frame behind latencies[i].
    std::vector<double> latencies;
    std::vector<double> arrivals;
    /// Ascending copy of `latencies`: the empirical reliability curve.
    std::vector<double> sorted_latencies;

    stats::SummaryStats summary;  ///< filled when delivered > 0
};

struct SimResult {
    std::vector<ServiceResult> services;
    uint64_t events_processed = 0;
    bool high_utilization_warning = false;
    std::string warning_text;
};

struct ReliabilityEstimate {
    double estimate = 0.0;
    double low = 0.0;
    double high = 1.0;
    uint64_t successes = 0;
    uint64_t trials = 0;
};

/// Empirical probability that a frame beats `deadline`, with a Wilson score
/// interval. Undelivered offered frames count as failures unless
/// `censor_undelivered` restricts the view to delivered frames only.
inline ReliabilityEstimate estimate_reliability(const SimResult& result, std::size_t service,
                                                double deadline, double confidence = 0.95,
                                                bool censor_undelivered = false) {
    if (service >= result.services.size()) throw DomainError("estimate_reliability: bad service");
    const ServiceResult& r = result.services[service];
    const uint64_t trials = censor_undelivered ? r.delivered : r.offered;
    if (trials == 0 || r.delivered == 0)
        throw NoSamplesError("estimate_reliability: no samples for service " + r.name);
    const auto& sorted = r.sorted_latencies;
    const uint64_t successes =
        std::upper_bound(sorted.begin(), sorted.end(), deadline) - sorted.begin();
    const stats::Interval iv = stats::wilson_interval(successes, trials, confidence);
    ReliabilityEstimate e;
    e.successes = successes;
    e.trials = trials;
    e.estimate = static_cast<double>(successes) / static_cast<double>(trials);
    e.low = iv.low;
    e.high = iv.high;
    return e;
}

/// FNV-1a digest over every count and latency bit pattern; two runs of the
/// same (scenario, seed) must agree on this.
inline uint64_t digest(const SimResult& result) {
    uint64_t h = 1469598103934665603ULL;
    const auto mix = [&h](uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= static_cast<uint8_t>(v >> (8 * i));
            h *= 1099511628211ULL;
        }
    };
    const auto mix_double = [&](double d) {
        uint64_t bits;
        std::memcpy(&bits, &d, sizeof(bits));
        mix(bits);
    };
    for (const auto& svc : result.services) {
        mix(svc.offered);
        mix(svc.delivered);
        mix(svc.to_ru1);
        mix(svc.to_ru2);
        mix(svc.decode_mismatches);
        for (const double v : svc.latencies) mix_double(v);
    }
    return h;
}

namespace detail {

struct Job {
    uint64_t frame_id = 0;
    int block_index = -1;
    double bits = 0.0;
};

struct Lane {
    double capacity = 0.0;
    std::deque<Job> fifo;
    bool busy = false;
    Job current;
    uint64_t epoch = 0;  // bumping it orphans any scheduled completion
    rng::Stream service_stream;
};

struct FrameState {
    uint32_t service = 0;
    double arrival_time = 0.0;
    bool measured = false;  // inside the measurement window
    bool delivered = false;
    uint8_t destination = 0;  // 0 = RU1, 1 = RU2
    int needed = 1;
    int received = 0;
    int jobs_left = 0;
    std::vector<int> received_indices;         // coded only
    std::vector<codec::CodedBlock> blocks;     // coded only
    std::vector<uint8_t> original;             // coded only
};

enum class EventKind : uint8_t { Arrival, Completion };

struct Event {
    double time = 0.0;
    uint64_t seq = 0;
    EventKind kind = EventKind::Arrival;
    uint32_t target = 0;  // service index or lane index
    uint64_t epoch = 0;   // completions: lane epoch at scheduling time
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

class Simulator {
public:
    explicit Simulator(const Scenario& sc) : sc_(sc), alloc_(apply_allocation(sc)) {
        build_lanes();
        for (std::size_t s = 0; s < sc_.services.size(); ++s) {
            const auto& svc = sc_.services[s];
            arrival_streams_.emplace_back(sc_.seed, "arrivals/" + svc.name);
            payload_streams_.emplace_back(sc_.seed, "payload/" + svc.name);
            if (svc.strategy.kind == StrategyKind::Coded)
                codecs_.push_back(std::make_unique<codec::BlockCodec>(codec::CodeGeometry{
                    static_cast<int>(svc_lanes_[s].size()), svc.strategy.split_factor}));
            else
                codecs_.push_back(nullptr);
        }
    }

    SimResult run() {
        SimResult result;
        result.services.resize(sc_.services.size());
        for (std::size_t s = 0; s < sc_.services.size(); ++s)
            result.services[s].name = sc_.services[s].name;
        check_utilization(result);
        result_ = &result;

        for (std::size_t s = 0; s < sc_.services.size(); ++s) schedule_next_arrival(s, 0.0);

        while (!events_.empty()) {
            const Event ev = events_.top();
            events_.pop();
            if (ev.time > sc_.sim_duration) break;
            ++result.events_processed;
            if (ev.kind == EventKind::Arrival) {
                handle_arrival(ev.target, ev.time);
                schedule_next_arrival(ev.target, ev.time);
            } else {
                Lane& lane = lanes_[ev.target];
                if (lane.epoch != ev.epoch || !lane.busy) continue;  // orphaned
                handle_completion(lane, ev.time);
            }
        }

        for (auto& svc : result.services) {
            svc.undelivered = svc.offered - svc.delivered;
            svc.sorted_latencies = svc.latencies;
            std::sort(svc.sorted_latencies.begin(), svc.sorted_latencies.end());
            if (!svc.latencies.empty()) svc.summary = stats::summarize(svc.latencies);
        }
        result_ = nullptr;
        return result;
    }

private:
    void build_lanes() {
        const int n = sc_.paths.path_count;
        svc_lanes_.resize(sc_.services.size());
        if (sc_.allocation.kind == AllocationKind::BandwidthSplit) {
            for (std::size_t s = 0; s < sc_.services.size(); ++s)
                for (int p = 0; p < n; ++p) {
                    svc_lanes_[s].push_back(static_cast<int>(lanes_.size()) + 0);
                    lanes_.emplace_back();
                    lanes_.back().capacity = alloc_[s].paths.capacity;
                }
        } else {
            for (int p = 0; p < n; ++p) {
                lanes_.emplace_back();
                lanes_.back().capacity = sc_.paths.capacity;
            }
            for (std::size_t s = 0; s < sc_.services.size(); ++s)
                for (const int p : alloc_[s].path_indices) svc_lanes_[s].push_back(p);
        }
        for (std::size_t i = 0; i < lanes_.size(); ++i)
            lanes_[i].service_stream = rng::Stream(sc_.seed, "lane/" + std::to_string(i));
    }

    /// Per-lane utilization estimate. Cancel-on-complete busies a lane for
    /// at most the k-th order-statistic time per frame; without
    /// cancellation every enqueued block is served in full.
    void check_utilization(SimResult& result) {
        std::vector<double> util(lanes_.size(), 0.0);
        for (std::size_t s = 0; s < sc_.services.size(); ++s) {
            const auto& svc = sc_.services[s];
            if (svc.traffic.arrival_rate <= 0.0) continue;
            const auto& lane_ids = svc_lanes_[s];
            const double cap = alloc_[s].paths.capacity;
            const int n_eff = static_cast<int>(lane_ids.size());
            switch (svc.strategy.kind) {
                case StrategyKind::SinglePath:
                    util[lane_ids[0]] +=
                        svc.traffic.arrival_rate * svc.traffic.frame_bits / cap;
                    break;
                case StrategyKind::Duplication:
                case StrategyKind::Coded: {
                    const int k =
                        svc.strategy.kind == StrategyKind::Coded ? svc.strategy.split_factor : 1;
                    const double block_bits = svc.traffic.frame_bits / k;
                    double per_frame_busy;
                    if (sc_.cancellation == CancellationMode::CancelOnComplete)
                        per_frame_busy =
                            analytic::order_statistic_moments(n_eff, k, cap / block_bits).mean;
                    else
                        per_frame_busy = block_bits / cap;
                    for (const int lane : lane_ids)
                        util[lane] += svc.traffic.arrival_rate * per_frame_busy;
                    break;
                }
            }
        }
        for (std::size_t i = 0; i < util.size(); ++i) {
            if (util[i] >= 0.95) {
                result.high_utilization_warning = true;
                result.warning_text = "estimated utilization " + std::to_string(util[i]) +
                                      " on lane " + std::to_string(i);
                break;
            }
        }
    }

    void schedule_next_arrival(std::size_t service, double now) {
        const double rate = sc_.services[service].traffic.arrival_rate;
        if (rate <= 0.0) return;
        const double t = now + arrival_streams_[service].exponential(rate);
        if (t > sc_.sim_duration) return;
        events_.push({t, next_seq_++, EventKind::Arrival, static_cast<uint32_t>(service), 0});
    }

    void handle_arrival(uint32_t service, double now) {
        const auto& svc = sc_.services[service];
        const uint64_t id = next_frame_id_++;
        FrameState f;
        f.service = service;
        f.arrival_time = now;
        f.measured = now >= sc_.warmup;
        f.destination = arrival_streams_[service].bernoulli(0.5) ? 1 : 0;

        ServiceResult& out = result_->services[service];
        if (f.measured) {
            ++out.offered;
            if (f.destination == 0)
                ++out.to_ru1;
            else
                ++out.to_ru2;
        }

        const auto& lane_ids = svc_lanes_[service];
        switch (svc.strategy.kind) {
            case StrategyKind::SinglePath:
                f.needed = 1;
                f.jobs_left = 1;
                frames_.emplace(id, std::move(f));
                enqueue(lanes_[lane_ids[0]], {id, -1, svc.traffic.frame_bits}, now);
                break;
            case StrategyKind::Duplication:
                f.needed = 1;
                f.jobs_left = static_cast<int>(lane_ids.size());
                frames_.emplace(id, std::move(f));
                for (const int lane : lane_ids)
                    enqueue(lanes_[lane], {id, -1, svc.traffic.frame_bits}, now);
                break;
            case StrategyKind::Coded: {
                const int k = svc.strategy.split_factor;
                f.needed = k;
                f.jobs_left = static_cast<int>(lane_ids.size());
                f.original.resize(
                    static_cast<std::size_t>((svc.traffic.frame_bits + 7.0) / 8.0));
                payload_streams_[service].fill_bytes(f.original.data(), f.original.size());
                f.blocks = codecs_[service]->encode(f.original, id);
                const double block_bits = svc.traffic.frame_bits / k;
                frames_.emplace(id, std::move(f));
                for (std::size_t i = 0; i < lane_ids.size(); ++i)
                    enqueue(lanes_[lane_ids[i]], {id, static_cast<int>(i), block_bits}, now);
                break;
            }
        }
    }

    void enqueue(Lane& lane, Job job, double now) {
        lane.fifo.push_back(job);
        if (!lane.busy) start_next(lane, now);
    }

    /// Pop until a live job is found and start serving it. Queued blocks of
    /// already-delivered frames are dropped here, which is equivalent to
    /// removing them at the completion instant: a FIFO queue cannot reach
    /// them earlier.
    void start_next(Lane& lane, double now) {
        while (!lane.fifo.empty()) {
            Job job = lane.fifo.front();
            lane.fifo.pop_front();
            auto it = frames_.find(job.frame_id);
            if (sc_.cancellation == CancellationMode::CancelOnComplete &&
                it->second.delivered) {
                finish_job(it);
                continue;
            }
            lane.busy = true;
            lane.current = job;
            ++lane.epoch;
            const double duration = lane.service_stream.exponential(lane.capacity / job.bits);
            events_.push({now + duration, next_seq_++, EventKind::Completion,
                          static_cast<uint32_t>(&lane - lanes_.data()), lane.epoch});
            return;
        }
        lane.busy = false;
    }

    void handle_completion(Lane& lane, double now) {
        const Job job = lane.current;
        lane.busy = false;
        auto it = frames_.find(job.frame_id);
        FrameState& f = it->second;
        --f.jobs_left;
        if (!f.delivered) {
            ++f.received;
            if (job.block_index >= 0) f.received_indices.push_back(job.block_index);
            if (f.received >= f.needed) deliver(it, now);
        }
        maybe_erase(it);
        start_next(lane, now);
    }

    void deliver(std::unordered_map<uint64_t, FrameState>::iterator it, double now) {
        FrameState& f = it->second;
        f.delivered = true;
        ServiceResult& out = result_->services[f.service];
        if (f.measured) {
            ++out.delivered;
            out.latencies.push_back(now - f.arrival_time);
            out.arrivals.push_back(f.arrival_time);
        }
        if (!f.blocks.empty()) {
            std::vector<codec::CodedBlock> received;
            received.reserve(f.received_indices.size());
            for (const int idx : f.received_indices) received.push_back(f.blocks[idx]);
            if (codecs_[f.service]->decode(received) != f.original) ++out.decode_mismatches;
            f.blocks.clear();
            f.original.clear();
        }
        if (sc_.cancellation == CancellationMode::CancelOnComplete) {
            const uint64_t id = it->first;
            for (const int lane_id : svc_lanes_[f.service]) {
                Lane& lane = lanes_[lane_id];
                if (lane.busy && lane.current.frame_id == id) {
                    --f.jobs_left;
                    ++lane.epoch;  // orphan the scheduled completion
                    lane.busy = false;
                    start_next(lane, now);
                }
            }
        }
    }

    void finish_job(std::unordered_map<uint64_t, FrameState>::iterator it) {
        --it->second.jobs_left;
        maybe_erase(it);
    }

    void maybe_erase(std::unordered_map<uint64_t, FrameState>::iterator it) {
        if (it->second.jobs_left <= 0) frames_.erase(it);
    }

    Scenario sc_;
    std::vector<ServiceAllocation> alloc_;
    std::vector<Lane> lanes_;
    std::vector<std::vector<int>> svc_lanes_;
    std::vector<rng::Stream> arrival_streams_;
    std::vector<rng::Stream> payload_streams_;
    std::vector<std::unique_ptr<codec::BlockCodec>> codecs_;
    std::unordered_map<uint64_t, FrameState> frames_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    uint64_t next_seq_ = 0;
    uint64_t next_frame_id_ = 0;
    SimResult* result_ = nullptr;
};

}  // namespace detail

/// Execute one simulation run. Identical (scenario, seed) inputs produce
/// identical results.
inline SimResult run(const Scenario& scenario) {
    detail::Simulator simulator(scenario);
    return simulator.run();
}

}  // namespace mpfh::sim
