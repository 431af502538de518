#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "pegscope/asset.hpp"
#include "pegscope/canonical.hpp"
#include "pegscope/date.hpp"

namespace pegscope {

enum class Namespace { market, attestation, news, outcome, trace };

inline constexpr Namespace kAllNamespaces[] = {Namespace::market, Namespace::attestation, Namespace::news,
                                               Namespace::outcome, Namespace::trace};

const char* to_string(Namespace ns) noexcept;
Namespace namespace_from_string(std::string_view name);

/// Immutable record identifier. Serializes as `ns/part/part...` with each
/// part percent-encoded (only RFC 3986 unreserved bytes pass through), so
/// `/` can never occur inside a part and serialization is injective.
struct RecordKey {
    Namespace ns = Namespace::market;
    std::vector<std::string> parts;

    static RecordKey market(const AssetId& asset, Date date);
    static RecordKey attestation(const AssetId& asset, Date date);
    static RecordKey news(std::string_view canonical_url);

    std::string serialize() const;
    static RecordKey parse(std::string_view serialized);

    auto operator<=>(const RecordKey&) const = default;
};

std::string percent_encode(std::string_view part);
std::string percent_decode(std::string_view encoded);

enum class OpenMode { read_only, read_write };

enum class PutOutcome { inserted, unchanged };

/// Append-only record store. Each namespace is one log file
/// (`<ns>.log`, lines `<key>\t<canonical json>`) replayed into an in-memory
/// index on open; `inserted_at` timestamps go to `<ns>.meta` and never
/// enter payload bytes. Readers share a lock; writers are serialized.
class Store {
public:
    /// In-memory store (no files).
    Store();
    Store(const std::filesystem::path& dir, OpenMode mode);

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    /// Throws IntegrityError when the key already holds different bytes.
    PutOutcome put(const RecordKey& key, const Json& payload);

    Json get(const RecordKey& key) const;
    /// Canonical payload bytes. Throws NotFoundError for an absent key.
    std::string get_bytes(const RecordKey& key) const;
    std::optional<std::string> find_bytes(const RecordKey& key) const;
    bool contains(const RecordKey& key) const;

    /// Records keyed `[asset, ISO date, ...]` with date in [start, end],
    /// ascending by date. Throws DomainError when start > end.
    std::vector<Json> range(Namespace ns, const AssetId& asset, Date start, Date end) const;

    /// Every record of a namespace in key order.
    std::vector<std::pair<RecordKey, std::string>> scan(Namespace ns) const;

    std::size_t size(Namespace ns) const;
    std::optional<std::chrono::system_clock::time_point> inserted_at(const RecordKey& key) const;

    bool persistent() const { return !dir_.empty(); }
    const std::filesystem::path& dir() const { return dir_; }

    static constexpr std::string_view kManifest = "pegscope-store.json";

private:
    struct Entry {
        RecordKey key;
        std::string bytes;
        std::optional<std::chrono::system_clock::time_point> inserted_at;
    };
    using Index = std::map<std::string, Entry>;

    void load_namespace(Namespace ns);
    Index& index(Namespace ns) { return indexes_[static_cast<std::size_t>(ns)]; }
    const Index& index(Namespace ns) const { return indexes_[static_cast<std::size_t>(ns)]; }

    std::filesystem::path dir_;
    OpenMode mode_ = OpenMode::read_write;
    mutable std::shared_mutex mutex_;
    Index indexes_[std::size(kAllNamespaces)];
};

}  // namespace pegscope
