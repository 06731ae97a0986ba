#include "mindpres/watchlist.hpp"

#include <fstream>

#include "mindpres/error.hpp"

namespace mindpres {

void Watchlist::apply_assessment(const RiskAssessment& a)
{
    if (a.risk == RiskLevel::low) {
        entries_.erase(a.app_id);
        return;
    }
    auto [it, inserted] = entries_.try_emplace(a.app_id);
    it->second.app_id = a.app_id;
    it->second.risk = a.risk;
    it->second.assessed_at = a.assessed_at;
}

bool Watchlist::set_override(const std::string& app_id, bool active)
{
    const auto it = entries_.find(app_id);
    if (it == entries_.end()) return false;
    it->second.override_active = active;
    return true;
}

const WatchlistEntry* Watchlist::find(const std::string& app_id) const
{
    const auto it = entries_.find(app_id);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string Watchlist::to_jsonl() const
{
    std::string out;
    for (const auto& [id, e] : entries_) {
        Json j;
        j["app_id"] = e.app_id;
        j["risk"] = to_string(e.risk);
        j["assessed_at"] = e.assessed_at;
        j["override_active"] = e.override_active;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

Watchlist Watchlist::parse_jsonl(std::istream& in)
{
    Watchlist wl;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        WatchlistEntry e;
        try {
            const Json j = Json::parse(text);
            e.app_id = j.at("app_id").get<std::string>();
            e.risk = risk_from_string(j.at("risk").get<std::string>());
            e.assessed_at = j.at("assessed_at").get<Tick>();
            e.override_active = j.value("override_active", false);
        } catch (const Json::exception& ex) {
            throw ParseError(line_no, ex.what());
        } catch (const Error& ex) {
            throw ParseError(line_no, ex.what());
        }
        if (e.app_id.empty()) throw ParseError(line_no, "empty app_id");
        if (e.risk == RiskLevel::low)
            throw IntegrityError("line " + std::to_string(line_no) + ": low-risk app '" + e.app_id + "' in watchlist");
        if (!wl.entries_.emplace(e.app_id, e).second)
            throw IntegrityError("line " + std::to_string(line_no) + ": duplicate app_id '" + e.app_id + "'");
    }
    return wl;
}

void Watchlist::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << to_jsonl();
    if (!out.flush()) throw Error("write to " + path.string() + " failed");
}

Watchlist Watchlist::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return parse_jsonl(in);
}

}  // namespace mindpres
