#ifndef BVN_LEDGER_HPP
#define BVN_LEDGER_HPP

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvn/participant.hpp"
#include "bvn/sha256.hpp"
#include "bvn/vehicle.hpp"

namespace bvn {

struct LedgerEntry {
    VehicleInfo payload;
    Digest prev_hash{};   // entry 0 links to the all-zero genesis digest
    Digest entry_hash{};  // sha256(canonical payload bytes ‖ prev_hash)
};

inline Digest compute_entry_hash(const VehicleInfo& payload, const Digest& prev) {
    std::vector<std::uint8_t> buf = canonical_bytes(payload);
    buf.insert(buf.end(), prev.begin(), prev.end());
    return sha256(buf);
}

struct EmptyInput : std::invalid_argument {
    EmptyInput() : std::invalid_argument("merkle root of empty sequence") {}
};

/// Binary Merkle root. Root of a single leaf is the leaf itself; an odd
/// node at any level is duplicated upward.
inline Digest compute_merkle_root(std::vector<Digest> level) {
    if (level.empty()) throw EmptyInput();
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        std::vector<Digest> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) {
            next.push_back(sha256_pair(level[i], level[i + 1]));
        }
        level = std::move(next);
    }
    return level.front();
}

/// Every modify attempt ends here, recorded for the attack metrics.
struct TamperAttempt {
    std::string actor_id;
    std::uint64_t record_id = 0;
    std::uint64_t time_ms = 0;
};

/// The one possible outcome of attempt_modify.
struct ModifyRejection {
    std::string warning;
};

/// Append-only hash-chained ledger of validated arrival-vehicle records.
///
/// Appends and reads serialize through one mutex, so concurrent appends
/// observe a total order consistent with record_id order and reads see a
/// consistent prefix.
class Ledger {
public:
    Ledger() = default;

    /// Rebuild from stored entries without recomputing hashes (snapshot
    /// load path; corrupt input is diagnosed later by verify_chain).
    static Ledger from_entries(std::vector<LedgerEntry> entries) {
        Ledger l;
        l.entries_ = std::move(entries);
        l.refresh_merkle_root();
        return l;
    }

    /// Append a validated claim. Record id and timestamp are assigned
    /// here, never taken from the broadcaster.
    const LedgerEntry& append_record(const VehicleClaim& claim, const Participant& actor,
                                     std::uint64_t clock_ms) {
        (void)actor;  // registration is checked by the caller holding the registry
        if (auto bad = find_malformed_field(claim)) throw MalformedRecord(*bad);
        std::lock_guard<std::mutex> lock(mutex_);
        LedgerEntry entry;
        entry.payload.record_id = entries_.size() + 1;
        entry.payload.vin = claim.vin;
        entry.payload.gps = claim.gps;
        entry.payload.trajectory = claim.trajectory;
        entry.payload.timestamp_ms = clock_ms;
        entry.prev_hash = entries_.empty() ? kZeroDigest : entries_.back().entry_hash;
        entry.entry_hash = compute_entry_hash(entry.payload, entry.prev_hash);
        entries_.push_back(std::move(entry));
        refresh_merkle_root();
        return entries_.back();
    }

    /// READ access: matching entries in record_id order.
    std::vector<LedgerEntry> read_records(
        const std::function<bool(const VehicleInfo&)>& filter = nullptr) const {
        std::lock_guard<std::mutex> lock(mutex_);
        std::vector<LedgerEntry> out;
        for (const auto& e : entries_) {
            if (!filter || filter(e.payload)) out.push_back(e);
        }
        return out;
    }

    /// Models the MODIFY attack surface. Rejects unconditionally for every
    /// actor, admin included, before any record lookup; the only effect is
    /// a TamperAttempt event.
    ModifyRejection attempt_modify(std::uint64_t record_id, const VehicleInfo& new_payload,
                                   const Participant& actor, std::uint64_t clock_ms) {
        (void)new_payload;
        std::lock_guard<std::mutex> lock(mutex_);
        tamper_attempts_.push_back(TamperAttempt{actor.id, record_id, clock_ms});
        return ModifyRejection{
            "Warning: ledger records are immutable; modification of record " +
            std::to_string(record_id) + " by '" + actor.id + "' rejected"};
    }

    /// Recompute every hash, link, and the merkle root. Returns nullopt if
    /// everything matches, else the smallest disagreeing entry index.
    std::optional<std::size_t> verify_chain() const {
        std::lock_guard<std::mutex> lock(mutex_);
        Digest prev = kZeroDigest;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const LedgerEntry& e = entries_[i];
            if (e.prev_hash != prev) return i;
            if (compute_entry_hash(e.payload, e.prev_hash) != e.entry_hash) return i;
            prev = e.entry_hash;
        }
        if (!entries_.empty()) {
            std::vector<Digest> hashes;
            hashes.reserve(entries_.size());
            for (const auto& e : entries_) hashes.push_back(e.entry_hash);
            if (compute_merkle_root(std::move(hashes)) != merkle_root_) {
                return entries_.size() - 1;
            }
        }
        return std::nullopt;
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return entries_.size();
    }

    std::vector<LedgerEntry> entries() const { return read_records(); }

    Digest merkle_root() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return merkle_root_;
    }

    std::vector<TamperAttempt> tamper_attempts() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return tamper_attempts_;
    }

    /// Fault injection for tamper-evidence experiments: mutates stored
    /// bytes directly, bypassing the append-only contract on purpose.
    void inject_corruption(std::size_t index, const std::function<void(LedgerEntry&)>& mutate) {
        std::lock_guard<std::mutex> lock(mutex_);
        mutate(entries_.at(index));
    }

    bool operator==(const Ledger& other) const {
        if (this == &other) return true;
        std::scoped_lock lock(mutex_, other.mutex_);
        if (entries_.size() != other.entries_.size()) return false;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (entries_[i].entry_hash != other.entries_[i].entry_hash) return false;
        }
        return merkle_root_ == other.merkle_root_;
    }

    Ledger(const Ledger& other) {
        std::lock_guard<std::mutex> lock(other.mutex_);
        entries_ = other.entries_;
        merkle_root_ = other.merkle_root_;
        tamper_attempts_ = other.tamper_attempts_;
    }

    Ledger& operator=(const Ledger& other) {
        if (this == &other) return *this;
        std::scoped_lock lock(mutex_, other.mutex_);
        entries_ = other.entries_;
        merkle_root_ = other.merkle_root_;
        tamper_attempts_ = other.tamper_attempts_;
        return *this;
    }

private:
    void refresh_merkle_root() {
        if (entries_.empty()) {
            merkle_root_ = kZeroDigest;
            return;
        }
        std::vector<Digest> hashes;
        hashes.reserve(entries_.size());
        for (const auto& e : entries_) hashes.push_back(e.entry_hash);
        merkle_root_ = compute_merkle_root(std::move(hashes));
    }

    mutable std::mutex mutex_;
    std::vector<LedgerEntry> entries_;
    Digest merkle_root_ = kZeroDigest;
    std::vector<TamperAttempt> tamper_attempts_;
};

}  // namespace bvn

#endif  // BVN_LEDGER_HPP
