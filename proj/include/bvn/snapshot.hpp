#ifndef BVN_SNAPSHOT_HPP
#define BVN_SNAPSHOT_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bvn/ledger.hpp"

namespace bvn {

struct SnapshotParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Snapshot layout: a header line naming the hash algorithm and entry
/// count, one canonical JSON record per line, and a final merkle_root
/// line. Writing then reading reproduces the file byte for byte.
inline std::string snapshot_to_string(const Ledger& ledger) {
    const auto entries = ledger.entries();
    std::ostringstream out;
    out << "ledger-snapshot " << kHashAlgorithmName << " " << entries.size() << "\n";
    for (const auto& e : entries) {
        nlohmann::ordered_json rec;
        rec["record_id"] = e.payload.record_id;
        rec["vin"] = e.payload.vin;
        rec["gps"] = {{"longitude", e.payload.gps.longitude_deg},
                      {"latitude", e.payload.gps.latitude_deg}};
        rec["trajectory"] = {{"speed", e.payload.trajectory.speed_mps},
                             {"acceleration", e.payload.trajectory.acceleration_mps2}};
        rec["timestamp"] = e.payload.timestamp_ms;
        rec["prev_hash"] = to_hex(e.prev_hash);
        rec["entry_hash"] = to_hex(e.entry_hash);
        out << rec.dump() << "\n";
    }
    out << "merkle_root " << to_hex(ledger.merkle_root()) << "\n";
    return out.str();
}

inline void write_snapshot(const Ledger& ledger, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open snapshot for writing: " + path);
    f << snapshot_to_string(ledger);
}

inline Ledger snapshot_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SnapshotParseError("empty snapshot file");
    std::istringstream header(line);
    std::string magic, algo;
    std::size_t count = 0;
    if (!(header >> magic >> algo >> count) || magic != "ledger-snapshot") {
        throw SnapshotParseError("bad snapshot header: " + line);
    }
    if (algo != kHashAlgorithmName) {
        throw SnapshotParseError("unsupported hash algorithm: " + algo);
    }
    std::vector<LedgerEntry> entries;
    entries.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) {
            throw SnapshotParseError("snapshot truncated at record " + std::to_string(i + 1));
        }
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SnapshotParseError("record " + std::to_string(i + 1) + ": " + e.what());
        }
        try {
            LedgerEntry e;
            e.payload.record_id = rec.at("record_id").get<std::uint64_t>();
            e.payload.vin = rec.at("vin").get<std::string>();
            e.payload.gps.longitude_deg = rec.at("gps").at("longitude").get<double>();
            e.payload.gps.latitude_deg = rec.at("gps").at("latitude").get<double>();
            e.payload.trajectory.speed_mps = rec.at("trajectory").at("speed").get<double>();
            e.payload.trajectory.acceleration_mps2 =
                rec.at("trajectory").at("acceleration").get<double>();
            e.payload.timestamp_ms = rec.at("timestamp").get<std::uint64_t>();
            e.prev_hash = digest_from_hex(rec.at("prev_hash").get<std::string>());
            e.entry_hash = digest_from_hex(rec.at("entry_hash").get<std::string>());
            entries.push_back(std::move(e));
        } catch (const std::exception& e) {
            throw SnapshotParseError("record " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    if (!std::getline(in, line)) throw SnapshotParseError("missing merkle_root line");
    std::istringstream footer(line);
    std::string key, hex;
    if (!(footer >> key >> hex) || key != "merkle_root") {
        throw SnapshotParseError("bad merkle_root line: " + line);
    }
    Ledger ledger = Ledger::from_entries(std::move(entries));
    // Stored root is informational; verify_chain recomputes from entries.
    (void)hex;
    return ledger;
}

inline Ledger read_snapshot(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SnapshotParseError("cannot open snapshot: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return snapshot_from_string(buf.str());
}

}  // namespace bvn

#endif  // BVN_SNAPSHOT_HPP
