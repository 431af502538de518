#include "pegscope/store.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>

#include "pegscope/error.hpp"
#include "pegscope/ingestion.hpp"

namespace pegscope {
namespace {

bool unreserved(unsigned char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
           c == '.' || c == '_' || c == '~';
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::filesystem::path log_path(const std::filesystem::path& dir, Namespace ns) {
    return dir / (std::string(to_string(ns)) + ".log");
}

std::filesystem::path meta_path(const std::filesystem::path& dir, Namespace ns) {
    return dir / (std::string(to_string(ns)) + ".meta");
}

std::string iso_timestamp(std::chrono::system_clock::time_point tp) {
    const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(tp);
    const auto days = std::chrono::floor<std::chrono::days>(secs);
    const std::chrono::year_month_day ymd{days};
    const std::chrono::hh_mm_ss hms{secs - days};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

void append_line(const std::filesystem::path& path, const std::string& line) {
    // One fwrite per record; a torn tail (no newline) is dropped on replay.
    std::FILE* f = std::fopen(path.c_str(), "ab");
    if (f == nullptr) throw IoError("cannot append to " + path.string());
    const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() && std::fflush(f) == 0;
    std::fclose(f);
    if (!ok) throw IoError("write failed for " + path.string());
}

}  // namespace

const char* to_string(Namespace ns) noexcept {
    switch (ns) {
        case Namespace::market: return "market";
        case Namespace::attestation: return "attestation";
        case Namespace::news: return "news";
        case Namespace::outcome: return "outcome";
        case Namespace::trace: return "trace";
    }
    return "unknown";
}

Namespace namespace_from_string(std::string_view name) {
    for (Namespace ns : kAllNamespaces) {
        if (name == to_string(ns)) return ns;
    }
    throw ParseError("unknown namespace '" + std::string(name) + "'");
}

std::string percent_encode(std::string_view part) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : part) {
        if (unreserved(c)) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xf]);
        }
    }
    return out;
}

std::string percent_decode(std::string_view encoded) {
    std::string out;
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        if (encoded[i] != '%') {
            out.push_back(encoded[i]);
            continue;
        }
        if (i + 2 >= encoded.size()) {
            throw ParseError("truncated percent escape in key part");
        }
        const int hi = hex_value(encoded[i + 1]);
        const int lo = hex_value(encoded[i + 2]);
        if (hi < 0 || lo < 0) throw ParseError("bad percent escape in key part");
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
    }
    return out;
}

RecordKey RecordKey::market(const AssetId& asset, Date date) {
    return {Namespace::market, {asset.symbol(), date.iso()}};
}

RecordKey RecordKey::attestation(const AssetId& asset, Date date) {
    return {Namespace::attestation, {asset.symbol(), date.iso()}};
}

RecordKey RecordKey::news(std::string_view canonical_url) {
    return {Namespace::news, {std::string(canonical_url)}};
}

std::string RecordKey::serialize() const {
    if (parts.empty()) throw DomainError("record key has no parts");
    std::string out = to_string(ns);
    for (const auto& p : parts) {
        out += '/';
        out += percent_encode(p);
    }
    return out;
}

RecordKey RecordKey::parse(std::string_view serialized) {
    RecordKey key;
    const auto first = serialized.find('/');
    if (first == std::string_view::npos) throw ParseError("record key has no parts: '" + std::string(serialized) + "'");
    key.ns = namespace_from_string(serialized.substr(0, first));
    std::size_t start = first + 1;
    while (true) {
        const auto pos = serialized.find('/', start);
        key.parts.push_back(percent_decode(serialized.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return key;
}

Store::Store() = default;

Store::Store(const std::filesystem::path& dir, OpenMode mode) : dir_(dir), mode_(mode) {
    const auto manifest = dir_ / std::string(kManifest);
    if (mode_ == OpenMode::read_only) {
        if (!std::filesystem::is_regular_file(manifest)) {
            throw IoError("no store at " + dir_.string() + " (missing " + std::string(kManifest) + ")");
        }
    } else {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create store directory " + dir_.string() + ": " + ec.message());
        if (!std::filesystem::exists(manifest)) {
            std::ofstream out(manifest, std::ios::binary);
            out << R"({"format":1})";
            if (!out) throw IoError("cannot write " + manifest.string());
        }
    }
    for (Namespace ns : kAllNamespaces) load_namespace(ns);
}

void Store::load_namespace(Namespace ns) {
    const auto path = log_path(dir_, ns);
    if (!std::filesystem::exists(path)) return;
    const std::string text = read_file(path);
    auto& idx = index(ns);
    std::size_t start = 0;
    std::size_t lineno = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) break;  // torn tail
        ++lineno;
        const std::string_view line(text.data() + start, nl - start);
        start = nl + 1;
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": missing key separator", lineno);
        }
        RecordKey key = RecordKey::parse(line.substr(0, tab));
        if (key.ns != ns) {
            throw IntegrityError(path.string() + ": line " + std::to_string(lineno) + ": key in wrong namespace");
        }
        std::string bytes(line.substr(tab + 1));
        parse_canonical(bytes);
        std::string serialized = key.serialize();
        auto [it, inserted] = idx.try_emplace(serialized, Entry{std::move(key), bytes, std::nullopt});
        if (!inserted && it->second.bytes != bytes) {
            throw IntegrityError(path.string() + ": conflicting records for key " + serialized);
        }
    }

    const auto meta = meta_path(dir_, ns);
    if (std::filesystem::exists(meta)) {
        // Metadata only; unparseable lines are ignored.
        const std::string mtext = read_file(meta);
        std::size_t mstart = 0;
        while (mstart < mtext.size()) {
            const auto nl = mtext.find('\n', mstart);
            if (nl == std::string::npos) break;
            const std::string_view line(mtext.data() + mstart, nl - mstart);
            mstart = nl + 1;
            const auto tab = line.find('\t');
            const auto sp = line.rfind('\t');
            if (tab == std::string_view::npos || sp == tab) continue;
            auto it = idx.find(std::string(line.substr(0, tab)));
            if (it == idx.end() || it->second.inserted_at) continue;
            long long epoch = 0;
            try {
                epoch = std::stoll(std::string(line.substr(sp + 1)));
            } catch (const std::exception&) {
                continue;
            }
            it->second.inserted_at = std::chrono::system_clock::time_point{std::chrono::seconds{epoch}};
        }
    }
}

PutOutcome Store::put(const RecordKey& key, const Json& payload) {
    if (mode_ == OpenMode::read_only) throw IoError("store is opened read-only");
    std::string serialized = key.serialize();
    std::string bytes = canonical_dump(payload);

    std::unique_lock lock(mutex_);
    auto& idx = index(key.ns);
    if (auto it = idx.find(serialized); it != idx.end()) {
        if (it->second.bytes == bytes) return PutOutcome::unchanged;
        throw IntegrityError("conflicting insert at " + serialized + ": stored sha256 " +
                             sha256_hex(it->second.bytes) + ", new sha256 " + sha256_hex(bytes));
    }
    const auto now = std::chrono::system_clock::now();
    if (persistent()) {
        append_line(log_path(dir_, key.ns), serialized + '\t' + bytes + '\n');
        const auto epoch = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
        append_line(meta_path(dir_, key.ns), serialized + '\t' + iso_timestamp(now) + '\t' + std::to_string(epoch) + '\n');
    }
    idx.emplace(std::move(serialized), Entry{key, std::move(bytes), now});
    return PutOutcome::inserted;
}

std::optional<std::string> Store::find_bytes(const RecordKey& key) const {
    const std::string serialized = key.serialize();
    std::shared_lock lock(mutex_);
    const auto& idx = index(key.ns);
    if (auto it = idx.find(serialized); it != idx.end()) return it->second.bytes;
    return std::nullopt;
}

std::string Store::get_bytes(const RecordKey& key) const {
    auto bytes = find_bytes(key);
    if (!bytes) throw NotFoundError("no record at " + key.serialize());
    return *std::move(bytes);
}

Json Store::get(const RecordKey& key) const { return Json::parse(get_bytes(key)); }

bool Store::contains(const RecordKey& key) const { return find_bytes(key).has_value(); }

std::vector<Json> Store::range(Namespace ns, const AssetId& asset, Date start, Date end) const {
    if (start > end) throw DomainError("range start " + start.iso() + " is after end " + end.iso());
    // ISO dates are fixed-width, so key order within one asset is date order.
    const std::string prefix = std::string(to_string(ns)) + '/' + percent_encode(asset.symbol()) + '/';
    const std::string lo = prefix + start.iso();
    const std::string hi = prefix + end.iso() + '0';  // '0' > '/' sorts after any extra key parts

    std::vector<Json> out;
    std::shared_lock lock(mutex_);
    const auto& idx = index(ns);
    for (auto it = idx.lower_bound(lo); it != idx.end() && it->first < hi; ++it) {
        out.push_back(Json::parse(it->second.bytes));
    }
    return out;
}

std::vector<std::pair<RecordKey, std::string>> Store::scan(Namespace ns) const {
    std::vector<std::pair<RecordKey, std::string>> out;
    std::shared_lock lock(mutex_);
    for (const auto& [_, entry] : index(ns)) out.emplace_back(entry.key, entry.bytes);
    return out;
}

std::size_t Store::size(Namespace ns) const {
    std::shared_lock lock(mutex_);
    return index(ns).size();
}

std::optional<std::chrono::system_clock::time_point> Store::inserted_at(const RecordKey& key) const {
    const std::string serialized = key.serialize();
    std::shared_lock lock(mutex_);
    const auto& idx = index(key.ns);
    if (auto it = idx.find(serialized); it != idx.end()) return it->second.inserted_at;
    return std::nullopt;
}

}  // namespace pegscope
