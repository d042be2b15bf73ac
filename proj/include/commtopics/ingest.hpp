#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commtopics {

using AccountId = std::string;

struct Account {
  AccountId account_id;
  std::optional<std::string> country_tag;
  std::size_t tweet_count = 0;

  bool operator==(const Account&) const = default;
};

enum class InteractionKind { mention, retweet };

std::string_view to_string(InteractionKind kind);
InteractionKind parse_interaction_kind(std::string_view text);

struct InteractionEvent {
  AccountId source;
  AccountId target;
  InteractionKind kind = InteractionKind::mention;
  std::string tweet_id;

  bool operator==(const InteractionEvent&) const = default;
};

struct FollowerEdge {
  AccountId follower;
  AccountId followee;

  bool operator==(const FollowerEdge&) const = default;
  auto operator<=>(const FollowerEdge&) const = default;
};

// Hashtag multiset of one account, keyed by normalized tag.
struct ProfileDocument {
  AccountId account_id;
  std::map<std::string, int> term_counts;

  std::size_t token_count() const;
  bool operator==(const ProfileDocument&) const = default;
};

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

struct Corpus {
  std::vector<Account> accounts;
  std::vector<InteractionEvent> events;
  std::vector<ProfileDocument> documents;
  std::size_t valid_records = 0;
  std::vector<RecordError> errors;
};

struct FollowerData {
  std::vector<FollowerEdge> edges;
  std::vector<RecordError> errors;
};

// Lowercase, NFKD-decompose, drop combining marks, strip a leading '#'
// and any whitespace. Returns an empty string when nothing remains.
std::string normalize_hashtag(std::string_view raw);

// Stable 64-bit FNV-1a digest rendered as "acct_<16 hex digits>".
std::string anonymize_id(std::string_view account_id);

// Parses a JSON Lines corpus. Malformed lines are recorded in
// Corpus::errors and skipped; a corpus with no valid record throws
// DataError. A repeated (tweet, target, kind) triple yields one event.
Corpus parse_corpus_jsonl(std::istream& in);
Corpus parse_corpus(const std::filesystem::path& path);

// CSV with header "follower,followee". Duplicates and self-loops dropped,
// output sorted.
FollowerData parse_followers(std::istream& in);
FollowerData parse_followers(const std::filesystem::path& path);

void anonymize(Corpus& corpus);
void anonymize(FollowerData& followers);

// Serialized forms consumed by later pipeline stages.
void write_accounts_csv(std::ostream& out, const std::vector<Account>& accounts);
void write_events_csv(std::ostream& out, const std::vector<InteractionEvent>& events);
void write_followers_csv(std::ostream& out, const std::vector<FollowerEdge>& edges);
void write_profiles_jsonl(std::ostream& out, const std::vector<ProfileDocument>& docs);

std::vector<InteractionEvent> read_events_csv(const std::filesystem::path& path);
std::vector<ProfileDocument> read_profiles_jsonl(const std::filesystem::path& path);

}  // namespace commtopics
