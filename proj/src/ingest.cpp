#include "propsearch/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "propsearch/errors.hpp"

namespace propsearch {

// Contents of data/stopwords_en.txt, generated at configure time.
extern const char* const kBundledStopwords;

namespace {

using json = nlohmann::json;

// Length in bytes of the whitespace code point starting at `pos`, or 0.
std::size_t whitespace_at(std::string_view s, std::size_t pos) {
  const auto c = static_cast<unsigned char>(s[pos]);
  if (c == ' ' || (c >= '\t' && c <= '\r')) return 1;
  auto byte = [&](std::size_t k) -> unsigned {
    return pos + k < s.size() ? static_cast<unsigned char>(s[pos + k]) : 0u;
  };
  if (c == 0xC2 && (byte(1) == 0x85 || byte(1) == 0xA0)) return 2;
  if (c == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;
  if (c == 0xE2 && byte(1) == 0x80) {
    const unsigned b = byte(2);
    if ((b >= 0x80 && b <= 0x8A) || b == 0xA8 || b == 0xA9 || b == 0xAF) return 3;
  }
  if (c == 0xE2 && byte(1) == 0x81 && byte(2) == 0x9F) return 3;
  if (c == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;
  return 0;
}

// Byte length of the code point at `pos`. Malformed sequences (stray
// continuation bytes, truncated or interrupted multi-byte sequences) are
// consumed one byte at a time so they never swallow a following space.
std::size_t code_point_length(std::string_view s, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(s[pos]);
  std::size_t len = 1;
  if ((lead >> 5) == 0x6) {
    len = 2;
  } else if ((lead >> 4) == 0xE) {
    len = 3;
  } else if ((lead >> 3) == 0x1E) {
    len = 4;
  }
  if (pos + len > s.size()) return 1;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[pos + k]) & 0xC0) != 0x80) return 1;
  }
  return len;
}

// Non-ASCII code points count as word characters except Latin-1
// punctuation/symbols and the General Punctuation block.
bool is_word_code_point(std::string_view cp) {
  const auto c = static_cast<unsigned char>(cp[0]);
  if (c < 0x80) return std::isalnum(c) != 0;
  if (cp.size() == 2 && c == 0xC2) {
    const auto b = static_cast<unsigned char>(cp[1]);
    return !(b >= 0xA1 && b <= 0xBF);
  }
  if (cp.size() == 3 && c == 0xE2) {
    const auto b1 = static_cast<unsigned char>(cp[1]);
    const auto b2 = static_cast<unsigned char>(cp[2]);
    if (b1 == 0x80 && b2 >= 0x90) return false;
    if (b1 == 0x81 && b2 <= 0x9E) return false;
  }
  return true;
}

std::string_view strip_non_word(std::string_view piece) {
  while (!piece.empty()) {
    const std::size_t len = code_point_length(piece, 0);
    if (is_word_code_point(piece.substr(0, len))) break;
    piece.remove_prefix(len);
  }
  while (!piece.empty()) {
    std::size_t start = piece.size() - 1;
    while (start > 0 && (static_cast<unsigned char>(piece[start]) & 0xC0) == 0x80) --start;
    if (is_word_code_point(piece.substr(start))) break;
    piece.remove_suffix(piece.size() - start);
  }
  return piece;
}

std::string_view prefix_and_digits(std::string_view id, char prefix, bool& ok) {
  ok = id.size() >= 2 && id[0] == prefix &&
       std::all_of(id.begin() + 1, id.end(), [](char c) { return c >= '0' && c <= '9'; });
  return ok ? id.substr(1) : id;
}

// Numeric order on the digit part, then raw string order.
bool numeric_id_less(std::string_view a, std::string_view b, char prefix) {
  bool ok_a = false;
  bool ok_b = false;
  std::string_view da = prefix_and_digits(a, prefix, ok_a);
  std::string_view db = prefix_and_digits(b, prefix, ok_b);
  if (ok_a != ok_b) return ok_a;  // well-formed ids first
  if (!ok_a) return a < b;
  auto strip = [](std::string_view d) {
    std::size_t i = 0;
    while (i + 1 < d.size() && d[i] == '0') ++i;
    return d.substr(i);
  };
  std::string_view na = strip(da);
  std::string_view nb = strip(db);
  if (na.size() != nb.size()) return na.size() < nb.size();
  if (na != nb) return na < nb;
  return a < b;
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t record) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string", record);
  return it->get<std::string>();
}

void validate_and_insert(PropertyRecord record, std::size_t record_no,
                         std::unordered_set<std::string>& seen, std::vector<PropertyRecord>& out) {
  if (!is_property_id(record.id)) {
    throw ParseError("invalid property id '" + record.id + "'", record_no);
  }
  if (!seen.insert(record.id).second) {
    throw ParseError("duplicate property id '" + record.id + "'", record_no);
  }
  std::erase_if(record.aliases, [](const std::string& a) { return trim(a).empty(); });
  out.push_back(std::move(record));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

bool is_property_id(std::string_view id) {
  bool ok = false;
  prefix_and_digits(id, 'P', ok);
  return ok;
}

bool is_entity_id(std::string_view id) {
  bool ok = false;
  prefix_and_digits(id, 'Q', ok);
  return ok;
}

bool property_id_less(std::string_view a, std::string_view b) { return numeric_id_less(a, b, 'P'); }

bool EntityIdLess::operator()(std::string_view a, std::string_view b) const {
  return numeric_id_less(a, b, 'Q');
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view text) {
  std::size_t begin = 0;
  while (begin < text.size()) {
    const std::size_t w = whitespace_at(text, begin);
    if (w == 0) break;
    begin += w;
  }
  text.remove_prefix(begin);
  // Scan forward to find the end of the last non-space code point.
  std::size_t last_end = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t w = whitespace_at(text, pos);
    if (w) {
      pos += w;
    } else {
      pos += code_point_length(text, pos);
      last_end = pos;
    }
  }
  return text.substr(0, last_end);
}

std::vector<std::string> tokenize(std::string_view text, const StopwordSet& stopwords) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t w = whitespace_at(text, pos);
    if (w) {
      pos += w;
      continue;
    }
    std::size_t end = pos;
    while (end < text.size() && whitespace_at(text, end) == 0) {
      end += code_point_length(text, end);
    }
    std::string_view piece = strip_non_word(text.substr(pos, end - pos));
    pos = end;
    if (piece.empty()) continue;
    std::string token = to_lower(piece);
    if (stopwords.contains(token)) continue;
    tokens.push_back(std::move(token));
  }
  return tokens;
}

StopwordSet parse_stopwords(std::istream& source) {
  StopwordSet words;
  std::string line;
  while (std::getline(source, line)) {
    std::string_view entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    words.insert(to_lower(entry));
  }
  return words;
}

StopwordSet load_stopwords_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file '" + path + "'");
  return parse_stopwords(in);
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = [] {
    std::istringstream in(kBundledStopwords);
    return parse_stopwords(in);
  }();
  return words;
}

PropertyFormat property_format_for_path(std::string_view path) {
  return path.ends_with(".tsv") ? PropertyFormat::kTsv : PropertyFormat::kJsonLines;
}

std::vector<PropertyRecord> parse_properties(std::istream& source, PropertyFormat format,
                                             ParseReport* report) {
  std::vector<PropertyRecord> records;
  std::unordered_set<std::string> seen;
  ParseReport local;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(source, raw)) {
    ++line_no;
    const std::string line = strip_cr(std::move(raw));
    if (trim(line).empty()) continue;

    PropertyRecord record;
    if (format == PropertyFormat::kJsonLines) {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
      }
      if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
      auto id = optional_string(obj, "id", line_no);
      if (!id) throw ParseError("missing property id", line_no);
      record.id = *id;
      record.description = optional_string(obj, "description", line_no);
      if (auto it = obj.find("aliases"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) throw ParseError("field 'aliases' must be an array", line_no);
        for (const auto& alias : *it) {
          if (!alias.is_string()) throw ParseError("alias entries must be strings", line_no);
          record.aliases.push_back(alias.get<std::string>());
        }
      }
      ++local.records_read;
      auto label = optional_string(obj, "label", line_no);
      if (!label || trim(*label).empty()) {
        if (!is_property_id(record.id)) {
          throw ParseError("invalid property id '" + record.id + "'", line_no);
        }
        ++local.skipped_missing_label;
        continue;
      }
      record.label = *label;
    } else {
      if (line_no == 1 && line.starts_with("id\t")) continue;
      auto fields = split(line, '\t');
      if (fields.size() < 2 || fields.size() > 4) {
        throw ParseError("expected 2 to 4 tab-separated fields, got " +
                             std::to_string(fields.size()),
                         line_no);
      }
      record.id = fields[0];
      ++local.records_read;
      if (trim(fields[1]).empty()) {
        if (!is_property_id(record.id)) {
          throw ParseError("invalid property id '" + record.id + "'", line_no);
        }
        ++local.skipped_missing_label;
        continue;
      }
      record.label = fields[1];
      if (fields.size() > 2 && !fields[2].empty()) record.description = fields[2];
      if (fields.size() > 3 && !fields[3].empty()) record.aliases = split(fields[3], '|');
    }
    validate_and_insert(std::move(record), line_no, seen, records);
  }
  if (source.bad()) throw IoError("read failure while parsing properties");
  if (report) *report = local;
  return records;
}

std::vector<PropertyRecord> parse_properties_file(const std::string& path,
                                                  std::optional<PropertyFormat> format,
                                                  ParseReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open properties file '" + path + "'");
  return parse_properties(in, format.value_or(property_format_for_path(path)), report);
}

void write_properties(std::span<const PropertyRecord> records, PropertyFormat format,
                      std::ostream& sink) {
  for (const auto& r : records) {
    if (format == PropertyFormat::kJsonLines) {
      json obj = {{"id", r.id},
                  {"label", r.label},
                  {"description", r.description ? json(*r.description) : json(nullptr)},
                  {"aliases", r.aliases}};
      sink << obj.dump() << '\n';
      continue;
    }
    auto check = [&](std::string_view field, bool is_alias) {
      const bool bad = field.find_first_of("\t\n\r") != std::string_view::npos ||
                       (is_alias && field.find('|') != std::string_view::npos);
      if (bad) throw ArgumentError("property " + r.id + " cannot be represented as TSV");
    };
    check(r.label, false);
    if (r.description) {
      check(*r.description, false);
      if (r.description->empty()) throw ArgumentError("property " + r.id + " has an empty description");
    }
    sink << r.id << '\t' << r.label << '\t' << r.description.value_or("") << '\t';
    for (std::size_t i = 0; i < r.aliases.size(); ++i) {
      check(r.aliases[i], true);
      if (i) sink << '|';
      sink << r.aliases[i];
    }
    sink << '\n';
  }
}

EntityPropertyMap parse_entity_map(std::istream& source,
                                   const std::vector<PropertyRecord>* known_properties) {
  EntityPropertyMap map;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(source, raw)) {
    ++line_no;
    const std::string line = strip_cr(std::move(raw));
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected '<entity>\\t<properties>'", line_no);
    const std::string entity(trim(std::string_view(line).substr(0, tab)));
    if (!is_entity_id(entity)) throw ParseError("invalid entity id '" + entity + "'", line_no);
    PropertyIdSet props;
    for (const auto& part : split(std::string_view(line).substr(tab + 1), ',')) {
      std::string id(trim(part));
      if (id.empty()) continue;
      if (!is_property_id(id)) throw ParseError("invalid property id '" + id + "'", line_no);
      props.insert(std::move(id));
    }
    if (props.empty()) throw ParseError("entity " + entity + " lists no properties", line_no);
    map[entity].merge(props);
  }
  if (source.bad()) throw IoError("read failure while parsing entity map");

  if (known_properties) {
    std::unordered_set<std::string> known;
    for (const auto& p : *known_properties) known.insert(p.id);
    PropertyIdSet unknown;
    for (const auto& [entity, props] : map) {
      for (const auto& id : props) {
        if (!known.contains(id)) unknown.insert(id);
      }
    }
    if (!unknown.empty()) {
      std::string list;
      for (const auto& id : unknown) list += (list.empty() ? "" : ",") + id;
      throw ValidationError("entity map references unknown properties: " + list);
    }
  }
  return map;
}

EntityPropertyMap parse_entity_map_file(const std::string& path,
                                        const std::vector<PropertyRecord>* known_properties) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open entity map '" + path + "'");
  return parse_entity_map(in, known_properties);
}

}  // namespace propsearch
