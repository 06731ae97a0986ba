#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "mindpres/evaluator.hpp"

namespace mindpres {

struct WatchlistEntry {
    std::string app_id;
    RiskLevel risk = RiskLevel::medium;  // never low
    Tick assessed_at = 0;
    bool override_active = false;

    bool operator==(const WatchlistEntry&) const = default;
};

/// Device-side set of suspicious apps. Only watchlisted apps are monitored.
class Watchlist {
public:
    /// High/medium inserts or refreshes the entry (keeping override_active);
    /// low removes it.
    void apply_assessment(const RiskAssessment& assessment);

    /// Override suppresses enforcement only; the app stays monitored.
    /// Returns false if the app is not watchlisted.
    bool set_override(const std::string& app_id, bool active);

    bool is_monitored(const std::string& app_id) const { return entries_.count(app_id) != 0; }
    const WatchlistEntry* find(const std::string& app_id) const;

    const std::map<std::string, WatchlistEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    bool operator==(const Watchlist&) const = default;

    std::string to_jsonl() const;
    /// Throws ParseError (1-based line) or IntegrityError on duplicates or a
    /// low-risk entry.
    static Watchlist parse_jsonl(std::istream& in);

    void save(const std::filesystem::path& path) const;
    static Watchlist load(const std::filesystem::path& path);

private:
    std::map<std::string, WatchlistEntry> entries_;
};

}  // namespace mindpres
