#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mindpres/hids.hpp"
#include "mindpres/nids.hpp"

namespace mindpres::prevention {

using Verdict = std::variant<hids::HidsVerdict, nids::NidsVerdict>;

const std::string& verdict_app(const Verdict& v);
Tick verdict_tick(const Verdict& v);
Tick verdict_first_evidence_tick(const Verdict& v);
IdsType verdict_ids_type(const Verdict& v);
std::string verdict_rule(const Verdict& v);

Json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const Json& j);

enum class ActionKind { terminate_app, block_host, notify_only };
std::string_view to_string(ActionKind kind);

struct PreventionAction {
    ActionKind kind = ActionKind::notify_only;
    /// App id for terminate/notify, host name for block_host.
    std::string target;
    std::string app_id;
    Tick tick = 0;
    /// Audit sequence number of the triggering verdict.
    std::uint64_t verdict_seq = 0;

    bool operator==(const PreventionAction&) const = default;
};

Json action_to_json(const PreventionAction& a);
PreventionAction action_from_json(const Json& j);

enum class OverrideChoice { allow, enforce };
enum class OverrideActor { user_prompt, policy_file };

struct OverrideDecision {
    std::string app_id;
    OverrideChoice decision = OverrideChoice::enforce;
    Tick tick = 0;
    OverrideActor actor = OverrideActor::policy_file;

    bool operator==(const OverrideDecision&) const = default;
};

Json override_to_json(const OverrideDecision& o);
OverrideDecision override_from_json(const Json& j);

/// JSON array of override objects. Throws ConfigError.
std::vector<OverrideDecision> load_policy_file(const std::filesystem::path& path);

/// Latest decision per app wins; an enforce decision revokes an allow.
class OverrideTable {
public:
    void record(const OverrideDecision& decision) { latest_[decision.app_id] = decision; }
    const OverrideDecision* find(const std::string& app_id) const;
    bool allows(const std::string& app_id) const;

private:
    std::map<std::string, OverrideDecision> latest_;
};

enum class PolicyMode { automatic, interactive };
std::string_view to_string(PolicyMode mode);
PolicyMode policy_mode_from_string(std::string_view s);

/// Source of answers in interactive mode.
class Prompter {
public:
    virtual ~Prompter() = default;
    virtual OverrideChoice ask(const Verdict& verdict) = 0;
};

/// Writes a one-line question and waits for `allow` or `enforce` on a file
/// descriptor. Timeout, EOF or any other answer means enforce.
class ConsolePrompter final : public Prompter {
public:
    ConsolePrompter(int input_fd, std::ostream& out,
                    std::chrono::milliseconds timeout = std::chrono::seconds(30))
        : fd_(input_fd), out_(out), timeout_(timeout)
    {
    }

    OverrideChoice ask(const Verdict& verdict) override;

private:
    std::string read_line_with_timeout();

    int fd_;
    std::ostream& out_;
    std::chrono::milliseconds timeout_;
    std::string pending_;
};

struct Decision {
    PreventionAction action;
    /// Set when the user was prompted; record it before acting.
    std::optional<OverrideDecision> prompted;
};

/// Host of the evidence entry with the largest upload, ties by name.
std::string offending_host(const nids::NidsVerdict& v);

/// Active allow override -> notify_only. Otherwise HIDS -> terminate_app and
/// NIDS -> block_host. In interactive mode an app with no recorded override
/// is first put to the prompter (enforce when there is none).
Decision decide(const Verdict& verdict, const OverrideTable& overrides, PolicyMode mode, Prompter* prompter,
                Tick now);

/// Enforcement state of the simulated device.
struct DeviceEffects {
    std::map<std::string, Tick> terminated;
    std::map<std::string, Tick> blocked_hosts;

    /// True for ticks strictly after the termination tick.
    bool is_terminated(const std::string& app_id, Tick t) const;
    bool is_blocked(const std::string& host, Tick t) const;
};

DeviceEffects apply(const PreventionAction& action, DeviceEffects effects);

enum class AuditEvent { verdict, action, override_decision };
std::string_view to_string(AuditEvent e);

struct AuditRecord {
    std::uint64_t sequence_no = 0;
    Tick tick = 0;
    AuditEvent event = AuditEvent::verdict;
    Json payload;

    Json to_json() const;
    static AuditRecord from_json(const Json& j);
};

/// Append-only audit trail, optionally mirrored to a JSONL sink. A failed
/// write raises AuditError and the record is not kept.
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(std::unique_ptr<std::ostream> sink) : sink_(std::move(sink)) {}
    /// Opens `path` for appending.
    static AuditLog open(const std::filesystem::path& path);

    const AuditRecord& append(Tick tick, AuditEvent event, Json payload);
    const std::vector<AuditRecord>& records() const { return records_; }

    std::string to_jsonl() const;
    static std::vector<AuditRecord> parse_jsonl(std::istream& in);

private:
    std::unique_ptr<std::ostream> sink_;
    std::vector<AuditRecord> records_;
};

/// Serialises verdict -> (prompted override) -> action into the audit log.
class PolicyEngine {
public:
    PolicyEngine(PolicyMode mode, AuditLog& audit, Prompter* prompter = nullptr)
        : mode_(mode), audit_(audit), prompter_(prompter)
    {
    }

    void record_override(const OverrideDecision& decision, Tick now);
    PreventionAction handle(const Verdict& verdict, Tick now);

    const OverrideTable& overrides() const { return overrides_; }
    PolicyMode mode() const { return mode_; }

private:
    PolicyMode mode_;
    AuditLog& audit_;
    Prompter* prompter_;
    OverrideTable overrides_;
};

/// Recomputes the action sequence from the verdicts and overrides in an audit
/// trail.
std::vector<PreventionAction> replay(const std::vector<AuditRecord>& records);

/// The actions recorded in an audit trail, in sequence order.
std::vector<PreventionAction> recorded_actions(const std::vector<AuditRecord>& records);

}  // namespace mindpres::prevention
