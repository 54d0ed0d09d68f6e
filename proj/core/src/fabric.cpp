#include "hspmv/fabric.hpp"

#include <algorithm>
#include <string>
#include <thread>

#ifdef __linux__
#include <sys/prctl.h>
#endif

namespace hspmv {

std::string_view to_string(ProgressMode m) {
    return m == ProgressMode::active_wait ? "active" : "background";
}

ProgressMode parse_progress_mode(std::string_view name) {
    if (name == "active" || name == "active-wait-only") return ProgressMode::active_wait;
    if (name == "background") return ProgressMode::background;
    throw std::invalid_argument("unknown progress mode '" + std::string(name) + "'");
}

void tighten_timer_slack() {
#ifdef __linux__
    thread_local bool done = false;
    if (!done) {
        ::prctl(PR_SET_TIMERSLACK, 1UL, 0UL, 0UL, 0UL);
        done = true;
    }
#endif
}

Fabric::Fabric(int nranks, LatencyModel model) : nranks_(nranks), model_(model) {
    if (nranks < 1) {
        throw FabricError("fabric needs at least one rank");
    }
    if (model.per_message < Nanos::zero() || model.per_element < Nanos::zero()) {
        throw FabricError("latency model delays must be non-negative");
    }
}

void Fabric::check_rank(int r, const char* what) const {
    if (r < 0 || r >= nranks_) {
        throw FabricError(std::string(what) + " rank " + std::to_string(r) + " out of range");
    }
}

MessageHandle Fabric::post_send(int src, int dst, std::vector<double> payload, int tag) {
    check_rank(src, "source");
    check_rank(dst, "destination");
    const auto now = Clock::now();
    std::lock_guard lock(mutex_);
    const Key key{src, dst, tag};
    const std::uint64_t ordinal = send_count_[key]++;
    mailbox_.emplace(std::tuple{src, dst, tag, ordinal}, Message{std::move(payload), now});
    const std::uint64_t id = next_id_++;
    pending_.emplace(id, Pending{false, key, ordinal, 0});
    arrived_.notify_all();
    return {this, id};
}

MessageHandle Fabric::post_recv(int dst, int src, std::size_t expected_len, int tag) {
    check_rank(src, "source");
    check_rank(dst, "destination");
    std::lock_guard lock(mutex_);
    const Key key{src, dst, tag};
    const std::uint64_t ordinal = recv_count_[key]++;
    const std::uint64_t id = next_id_++;
    pending_.emplace(id, Pending{true, key, ordinal, expected_len});
    return {this, id};
}

std::vector<std::vector<double>> Fabric::wait_all(std::span<const MessageHandle> handles) {
    tighten_timer_slack();
    std::vector<std::vector<double>> out(handles.size());
    std::vector<Pending> ops;
    ops.reserve(handles.size());
    {
        std::lock_guard lock(mutex_);
        for (const auto& h : handles) {
            if (h.fabric != this) {
                throw FabricError("handle belongs to a different fabric");
            }
            const auto it = pending_.find(h.id);
            if (it == pending_.end()) {
                throw FabricError("handle " + std::to_string(h.id) +
                                  " is unknown or already completed");
            }
        }
        for (const auto& h : handles) {
            auto node = pending_.extract(h.id);
            if (node.empty()) {
                throw FabricError("handle " + std::to_string(h.id) + " listed twice");
            }
            ops.push_back(node.mapped());
        }
    }

    // Progress clock for active mode: it only advances while we are in here.
    auto progress = Clock::now();
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const Pending& op = ops[k];
        if (!op.is_recv) {
            continue;  // sends are buffered and complete locally
        }
        Message msg;
        {
            std::unique_lock lock(mutex_);
            const auto slot = std::tuple_cat(op.key, std::tuple{op.ordinal});
            arrived_.wait(lock, [&] { return mailbox_.count(slot) != 0; });
            auto node = mailbox_.extract(slot);
            msg = std::move(node.mapped());
        }
        if (msg.payload.size() != op.expected_len) {
            throw FabricError("receive from rank " + std::to_string(std::get<0>(op.key)) +
                              " expected " + std::to_string(op.expected_len) + " elements, got " +
                              std::to_string(msg.payload.size()));
        }
        const Nanos cost = model_.cost(msg.payload.size());
        Clock::time_point ready;
        if (model_.mode == ProgressMode::active_wait) {
            ready = std::max(progress, msg.posted) + cost;
            progress = ready;
        } else {
            ready = msg.posted + cost;
        }
        if (cost > Nanos::zero()) {
            std::this_thread::sleep_until(ready);
        }
        out[k] = std::move(msg.payload);
    }
    return out;
}

std::size_t Fabric::in_flight() const {
    std::lock_guard lock(mutex_);
    return mailbox_.size();
}

}  // namespace hspmv
