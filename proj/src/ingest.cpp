#include "commtopics/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "commtopics/error.hpp"
#include "commtopics/io.hpp"

namespace commtopics {

namespace {

using nlohmann::json;

constexpr const char* kStage = "ingest";

std::string id_from_json(const json& value, const char* field) {
  if (value.is_string()) {
    auto text = value.get<std::string>();
    if (!text.empty()) return text;
  } else if (value.is_number_integer()) {
    return value.dump();
  }
  throw std::invalid_argument(std::string("field '") + field + "' is not a valid id");
}

std::string entity_id(const json& entity) {
  if (entity.is_object()) {
    for (const char* key : {"id", "user_id", "id_str"}) {
      if (entity.contains(key)) return id_from_json(entity.at(key), "mentions[].id");
    }
    throw std::invalid_argument("mention entity without id");
  }
  return id_from_json(entity, "mentions[]");
}

std::string hashtag_text(const json& entity) {
  if (entity.is_string()) return entity.get<std::string>();
  if (entity.is_object()) {
    for (const char* key : {"text", "tag"}) {
      if (entity.contains(key) && entity.at(key).is_string()) {
        return entity.at(key).get<std::string>();
      }
    }
  }
  throw std::invalid_argument("hashtag entity is neither a string nor {text}");
}

const json& entity_array(const json& entities, const char* key) {
  static const json empty = json::array();
  if (!entities.contains(key) || entities.at(key).is_null()) return empty;
  const json& value = entities.at(key);
  if (!value.is_array()) {
    throw std::invalid_argument(std::string("entities.") + key + " is not an array");
  }
  return value;
}

struct ParsedRecord {
  std::string tweet_id;
  std::string user_id;
  std::optional<std::string> country;
  std::vector<std::string> mentions;
  std::optional<std::string> retweet_of;
  std::vector<std::string> hashtags;
};

ParsedRecord parse_record(std::string_view line) {
  const json record = json::parse(line);
  if (!record.is_object()) throw std::invalid_argument("record is not a JSON object");
  if (!record.contains("id")) throw std::invalid_argument("missing field 'id'");
  if (!record.contains("user_id")) throw std::invalid_argument("missing field 'user_id'");

  ParsedRecord parsed;
  parsed.tweet_id = id_from_json(record.at("id"), "id");
  parsed.user_id = id_from_json(record.at("user_id"), "user_id");
  if (record.contains("text") && !record.at("text").is_string() && !record.at("text").is_null()) {
    throw std::invalid_argument("field 'text' is not a string");
  }
  if (record.contains("country") && record.at("country").is_string()) {
    parsed.country = record.at("country").get<std::string>();
  }
  if (record.contains("retweet_of_user") && !record.at("retweet_of_user").is_null()) {
    parsed.retweet_of = id_from_json(record.at("retweet_of_user"), "retweet_of_user");
  }
  if (record.contains("entities") && !record.at("entities").is_null()) {
    const json& entities = record.at("entities");
    if (!entities.is_object()) throw std::invalid_argument("field 'entities' is not an object");
    for (const json& mention : entity_array(entities, "mentions")) {
      parsed.mentions.push_back(entity_id(mention));
    }
    for (const json& tag : entity_array(entities, "hashtags")) {
      parsed.hashtags.push_back(hashtag_text(tag));
    }
  }
  return parsed;
}

}  // namespace

std::string_view to_string(InteractionKind kind) {
  return kind == InteractionKind::mention ? "mention" : "retweet";
}

InteractionKind parse_interaction_kind(std::string_view text) {
  if (text == "mention") return InteractionKind::mention;
  if (text == "retweet") return InteractionKind::retweet;
  throw DataError(kStage, "unknown interaction kind '" + std::string(text) + "'");
}

std::size_t ProfileDocument::token_count() const {
  return std::accumulate(term_counts.begin(), term_counts.end(), std::size_t{0},
                         [](std::size_t sum, const auto& entry) {
                           return sum + static_cast<std::size_t>(entry.second);
                         });
}

std::string normalize_hashtag(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkd = icu::Normalizer2::getNFKDInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKD normalizer unavailable");

  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  text.foldCase();
  icu::UnicodeString decomposed = nfkd->normalize(text, status);
  if (U_FAILURE(status)) return {};

  icu::UnicodeString kept;
  for (int32_t i = 0; i < decomposed.length();) {
    const UChar32 cp = decomposed.char32At(i);
    i += U16_LENGTH(cp);
    if (u_charType(cp) == U_NON_SPACING_MARK || u_isUWhiteSpace(cp)) continue;
    if (kept.isEmpty() && cp == U'#') continue;
    kept.append(cp);
  }
  std::string out;
  kept.toUTF8String(out);
  return out;
}

std::string anonymize_id(std::string_view account_id) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : account_id) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "acct_%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

Corpus parse_corpus_jsonl(std::istream& in) {
  std::map<AccountId, Account> accounts;
  std::map<AccountId, ProfileDocument> documents;
  std::set<std::tuple<std::string, std::string, std::string, int>> seen;
  Corpus corpus;

  std::string raw;
  std::size_t line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    const std::string_view line = io::trim_line(raw, line_number == 1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    ParsedRecord record;
    try {
      record = parse_record(line);
    } catch (const std::exception& e) {
      corpus.errors.push_back({line_number, e.what()});
      continue;
    }
    ++corpus.valid_records;

    Account& account = accounts[record.user_id];
    account.account_id = record.user_id;
    ++account.tweet_count;
    if (!account.country_tag && record.country && !record.country->empty()) {
      account.country_tag = record.country;
    }

    ProfileDocument& doc = documents[record.user_id];
    doc.account_id = record.user_id;
    for (const std::string& tag : record.hashtags) {
      std::string normalized = normalize_hashtag(tag);
      if (!normalized.empty()) ++doc.term_counts[normalized];
    }

    auto emit = [&](const std::string& target, InteractionKind kind) {
      if (target == record.user_id) return;
      auto key = std::make_tuple(record.user_id, record.tweet_id, target, static_cast<int>(kind));
      if (!seen.insert(key).second) return;
      corpus.events.push_back({record.user_id, target, kind, record.tweet_id});
    };
    for (const std::string& target : record.mentions) emit(target, InteractionKind::mention);
    if (record.retweet_of) emit(*record.retweet_of, InteractionKind::retweet);
  }

  if (corpus.valid_records == 0) {
    throw DataError(kStage, "corpus contains no valid records (" +
                                std::to_string(corpus.errors.size()) + " malformed lines)");
  }

  for (auto& [id, account] : accounts) corpus.accounts.push_back(std::move(account));
  for (auto& [id, doc] : documents) corpus.documents.push_back(std::move(doc));
  std::sort(corpus.events.begin(), corpus.events.end(),
            [](const InteractionEvent& a, const InteractionEvent& b) {
              return std::tie(a.source, a.tweet_id, a.target, a.kind) <
                     std::tie(b.source, b.tweet_id, b.target, b.kind);
            });
  return corpus;
}

Corpus parse_corpus(const std::filesystem::path& path) {
  auto in = io::open_input(path, kStage);
  return parse_corpus_jsonl(in);
}

FollowerData parse_followers(std::istream& in) {
  FollowerData data;
  std::string raw;
  if (!std::getline(in, raw)) throw DataError(kStage, "follower file is empty; expected header follower,followee");
  auto header = io::split_csv_line(io::trim_line(raw, true));
  if (header.size() != 2 || header[0] != "follower" || header[1] != "followee") {
    throw DataError(kStage, "follower file must start with header follower,followee");
  }

  std::set<FollowerEdge> unique;
  std::size_t line_number = 1;
  while (std::getline(in, raw)) {
    ++line_number;
    const std::string_view line = io::trim_line(raw, false);
    if (line.empty()) continue;
    auto fields = io::split_csv_line(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      data.errors.push_back({line_number, "expected two non-empty fields"});
      continue;
    }
    if (fields[0] == fields[1]) continue;
    unique.insert({std::move(fields[0]), std::move(fields[1])});
  }
  data.edges.assign(unique.begin(), unique.end());
  return data;
}

FollowerData parse_followers(const std::filesystem::path& path) {
  auto in = io::open_input(path, kStage);
  return parse_followers(in);
}

void anonymize(Corpus& corpus) {
  for (auto& account : corpus.accounts) account.account_id = anonymize_id(account.account_id);
  for (auto& event : corpus.events) {
    event.source = anonymize_id(event.source);
    event.target = anonymize_id(event.target);
  }
  for (auto& doc : corpus.documents) doc.account_id = anonymize_id(doc.account_id);
  std::sort(corpus.accounts.begin(), corpus.accounts.end(),
            [](const Account& a, const Account& b) { return a.account_id < b.account_id; });
  std::sort(corpus.documents.begin(), corpus.documents.end(),
            [](const ProfileDocument& a, const ProfileDocument& b) {
              return a.account_id < b.account_id;
            });
  std::sort(corpus.events.begin(), corpus.events.end(),
            [](const InteractionEvent& a, const InteractionEvent& b) {
              return std::tie(a.source, a.tweet_id, a.target, a.kind) <
                     std::tie(b.source, b.tweet_id, b.target, b.kind);
            });
}

void anonymize(FollowerData& followers) {
  for (auto& edge : followers.edges) {
    edge.follower = anonymize_id(edge.follower);
    edge.followee = anonymize_id(edge.followee);
  }
  std::sort(followers.edges.begin(), followers.edges.end());
}

void write_accounts_csv(std::ostream& out, const std::vector<Account>& accounts) {
  out << "account_id,country_tag,tweet_count\n";
  for (const auto& account : accounts) {
    out << io::csv_field(account.account_id) << ','
        << io::csv_field(account.country_tag.value_or("")) << ',' << account.tweet_count << '\n';
  }
}

void write_events_csv(std::ostream& out, const std::vector<InteractionEvent>& events) {
  out << "source,target,kind,tweet_id\n";
  for (const auto& event : events) {
    out << io::csv_field(event.source) << ',' << io::csv_field(event.target) << ','
        << to_string(event.kind) << ',' << io::csv_field(event.tweet_id) << '\n';
  }
}

void write_followers_csv(std::ostream& out, const std::vector<FollowerEdge>& edges) {
  out << "follower,followee\n";
  for (const auto& edge : edges) {
    out << io::csv_field(edge.follower) << ',' << io::csv_field(edge.followee) << '\n';
  }
}

void write_profiles_jsonl(std::ostream& out, const std::vector<ProfileDocument>& docs) {
  for (const auto& doc : docs) {
    json record;
    record["account_id"] = doc.account_id;
    record["terms"] = json::object();
    for (const auto& [term, count] : doc.term_counts) record["terms"][term] = count;
    out << record.dump() << '\n';
  }
}

std::vector<InteractionEvent> read_events_csv(const std::filesystem::path& path) {
  auto in = io::open_input(path, "graph");
  std::vector<InteractionEvent> events;
  std::string raw;
  std::getline(in, raw);
  while (std::getline(in, raw)) {
    const auto line = io::trim_line(raw, false);
    if (line.empty()) continue;
    auto fields = io::split_csv_line(line);
    if (fields.size() != 4) throw DataError("graph", "malformed row in " + path.string());
    events.push_back({fields[0], fields[1], parse_interaction_kind(fields[2]), fields[3]});
  }
  return events;
}

std::vector<ProfileDocument> read_profiles_jsonl(const std::filesystem::path& path) {
  auto in = io::open_input(path, "describe");
  std::vector<ProfileDocument> docs;
  std::string raw;
  while (std::getline(in, raw)) {
    if (raw.empty()) continue;
    const json record = json::parse(raw);
    ProfileDocument doc;
    doc.account_id = record.at("account_id").get<std::string>();
    for (const auto& [term, count] : record.at("terms").items()) {
      doc.term_counts[term] = count.get<int>();
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace commtopics
