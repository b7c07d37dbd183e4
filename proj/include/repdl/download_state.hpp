#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "repdl/scheme.hpp"

namespace repdl {

/// Downloaded sequence I_l plus the residual bookkeeping needed to answer
/// "which servers are still useful" in O(1). A download costs O(R).
///
/// Holds a non-owning pointer to its scheme; the scheme must outlive the state.
class DownloadState {
public:
    explicit DownloadState(const StorageScheme& scheme)
        : scheme_(&scheme), is_downloaded_(scheme.fragments() + 1, false), residual_count_(scheme.servers(), 0),
          useful_pos_(scheme.servers(), kAbsent) {
        for (ServerId b = 1; b <= scheme.servers(); ++b) {
            residual_count_[b - 1] = static_cast<std::uint32_t>(scheme.fragment_set(b).size());
            if (residual_count_[b - 1] > 0) {
                useful_pos_[b - 1] = static_cast<std::uint32_t>(useful_.size());
                useful_.push_back(b);
            }
        }
    }

    /// State reached by downloading `fragments` in the given order.
    static DownloadState after(const StorageScheme& scheme, std::span<const FragmentId> fragments) {
        DownloadState s(scheme);
        for (FragmentId v : fragments) s.advance(v);
        return s;
    }

    /// Downloads v: removes it from every S_b^l with b in Phi_v. A server leaves
    /// the useful set exactly when its residual becomes empty.
    void advance(FragmentId v) {
        if (v == 0 || v > scheme_->fragments())
            detail::fail(ErrorCode::IdOutOfRange, "fragment " + std::to_string(v) + " not in scheme");
        if (is_downloaded_[v])
            detail::fail(ErrorCode::AlreadyDownloaded, "fragment " + std::to_string(v) + " already downloaded");
        is_downloaded_[v] = true;
        downloaded_.push_back(v);
        for (ServerId b : scheme_->occupancy(v))
            if (--residual_count_[b - 1] == 0) remove_useful(b);
    }

    const StorageScheme& scheme() const noexcept { return *scheme_; }
    std::uint32_t ell() const noexcept { return static_cast<std::uint32_t>(downloaded_.size()); }
    bool complete() const noexcept { return downloaded_.size() == scheme_->fragments(); }

    const std::vector<FragmentId>& downloaded() const noexcept { return downloaded_; }
    bool is_downloaded(FragmentId v) const { return is_downloaded_.at(v); }

    /// N(I_l).
    std::uint32_t n_useful() const noexcept { return static_cast<std::uint32_t>(useful_.size()); }
    bool is_useful(ServerId b) const { return useful_pos_.at(b - 1) != kAbsent; }
    /// Useful servers in internal (deterministic, unsorted) order; index-addressable for sampling.
    std::span<const ServerId> useful_view() const noexcept { return useful_; }
    /// U(I_l), sorted.
    std::vector<ServerId> useful_servers() const {
        std::vector<ServerId> u = useful_;
        std::sort(u.begin(), u.end());
        return u;
    }

    std::uint32_t residual_size(ServerId b) const { return residual_count_.at(b - 1); }
    /// S_b^l = S_b \ I_l, sorted.
    std::vector<FragmentId> residual(ServerId b) const {
        std::vector<FragmentId> out;
        for (FragmentId v : scheme_->fragment_set(b))
            if (!is_downloaded_[v]) out.push_back(v);
        return out;
    }
    std::vector<FragmentId> remaining() const {
        std::vector<FragmentId> out;
        for (FragmentId v = 1; v <= scheme_->fragments(); ++v)
            if (!is_downloaded_[v]) out.push_back(v);
        return out;
    }

    /// Downloaded set as a bitmask (bit v-1). Requires V <= 64.
    std::uint64_t mask() const noexcept {
        std::uint64_t m = 0;
        for (FragmentId v : downloaded_) m |= std::uint64_t{1} << (v - 1);
        return m;
    }

private:
    static constexpr std::uint32_t kAbsent = 0xffffffffu;

    void remove_useful(ServerId b) {
        const std::uint32_t pos = useful_pos_[b - 1];
        const ServerId last = useful_.back();
        useful_[pos] = last;
        useful_pos_[last - 1] = pos;
        useful_.pop_back();
        useful_pos_[b - 1] = kAbsent;
    }

    const StorageScheme* scheme_;
    std::vector<FragmentId> downloaded_;
    std::vector<bool> is_downloaded_;
    std::vector<std::uint32_t> residual_count_;
    std::vector<ServerId> useful_;
    std::vector<std::uint32_t> useful_pos_;
};

/// Value-returning form of DownloadState::advance.
inline DownloadState advance_state(const DownloadState& state, FragmentId v) {
    DownloadState next = state;
    next.advance(v);
    return next;
}

} // namespace repdl
