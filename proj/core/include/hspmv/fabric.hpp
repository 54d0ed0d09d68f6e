/// @file fabric.hpp
/// @brief In-process message transport between rank thread groups.
///
/// Ranks are thread groups inside one process; the fabric stands in for the
/// network. Each message pays an affine latency
///     per_message + per_element * length.
/// In `active_wait` mode (the default) that latency only elapses while the
/// receiving rank sits inside wait_all, and a rank's receives are progressed
/// one after another: a posted message does not move on its own. This mirrors
/// MPI libraries without asynchronous progress, where a transfer advances
/// only while some thread is inside the library. `background` mode lets the
/// latency run in real time from the moment of posting.
///
/// Messages between a fixed (src, dst, tag) triple are matched in post order.
/// Deadlock detection is not provided: waiting on a receive whose send is
/// never posted blocks forever.

#ifndef HSPMV_FABRIC_HPP
#define HSPMV_FABRIC_HPP

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace hspmv {

using Clock = std::chrono::steady_clock;
using Nanos = std::chrono::nanoseconds;

enum class ProgressMode { active_wait, background };

std::string_view to_string(ProgressMode m);
ProgressMode parse_progress_mode(std::string_view name);

struct LatencyModel {
    Nanos per_message{0};
    Nanos per_element{0};
    ProgressMode mode = ProgressMode::active_wait;

    Nanos cost(std::size_t elements) const {
        return per_message + per_element * static_cast<std::int64_t>(elements);
    }
};

class FabricError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Fabric;

struct MessageHandle {
    const Fabric* fabric = nullptr;
    std::uint64_t id = 0;
};

class Fabric {
  public:
    Fabric(int nranks, LatencyModel model);
    Fabric(const Fabric&) = delete;
    Fabric& operator=(const Fabric&) = delete;

    int nranks() const { return nranks_; }
    const LatencyModel& model() const { return model_; }

    MessageHandle post_send(int src, int dst, std::vector<double> payload, int tag);
    MessageHandle post_recv(int dst, int src, std::size_t expected_len, int tag);

    /// Completes every handle. The result has one entry per handle, holding the
    /// payload for receives and an empty vector for sends. A handle completes
    /// at most once; waiting again throws FabricError.
    std::vector<std::vector<double>> wait_all(std::span<const MessageHandle> handles);

    /// Number of messages posted but not yet received.
    std::size_t in_flight() const;

  private:
    using Key = std::tuple<int, int, int>;  // src, dst, tag

    struct Pending {
        bool is_recv = false;
        Key key{};
        std::uint64_t ordinal = 0;
        std::size_t expected_len = 0;
    };
    struct Message {
        std::vector<double> payload;
        Clock::time_point posted;
    };

    void check_rank(int r, const char* what) const;

    const int nranks_;
    const LatencyModel model_;

    mutable std::mutex mutex_;
    std::condition_variable arrived_;
    std::uint64_t next_id_ = 1;
    std::unordered_map<std::uint64_t, Pending> pending_;
    std::map<Key, std::uint64_t> send_count_;
    std::map<Key, std::uint64_t> recv_count_;
    std::map<std::tuple<int, int, int, std::uint64_t>, Message> mailbox_;
};

/// Makes sleeps on the calling thread wake close to their deadline (Linux
/// timer slack defaults to 50us). No-op elsewhere.
void tighten_timer_slack();

}  // namespace hspmv

#endif  // HSPMV_FABRIC_HPP
