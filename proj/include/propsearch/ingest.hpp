#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace propsearch {

/// One Wikidata property with its English metadata.
struct PropertyRecord {
  std::string id;  // "P" followed by digits
  std::string label;
  std::optional<std::string> description;
  std::vector<std::string> aliases;

  friend bool operator==(const PropertyRecord&, const PropertyRecord&) = default;
};

enum class PropertyFormat { kJsonLines, kTsv };

struct ParseReport {
  std::size_t records_read = 0;
  std::size_t skipped_missing_label = 0;
};

bool is_property_id(std::string_view id);
bool is_entity_id(std::string_view id);

/// Orders property ids numerically (P2 < P10), falling back to the raw
/// string for equal numeric values with different spellings.
bool property_id_less(std::string_view a, std::string_view b);

/// Parses a property snapshot. Records without an English label are
/// skipped and counted in `report`. Throws ParseError naming the 1-based
/// record index on malformed input or duplicate ids.
std::vector<PropertyRecord> parse_properties(std::istream& source, PropertyFormat format,
                                             ParseReport* report = nullptr);

std::vector<PropertyRecord> parse_properties_file(const std::string& path,
                                                  std::optional<PropertyFormat> format = {},
                                                  ParseReport* report = nullptr);

/// Picks the format from the file extension (.tsv → tsv, otherwise JSON lines).
PropertyFormat property_format_for_path(std::string_view path);

void write_properties(std::span<const PropertyRecord> records, PropertyFormat format,
                      std::ostream& sink);

using StopwordSet = std::unordered_set<std::string>;

/// The bundled English function-word list.
const StopwordSet& default_stopwords();

/// One word per line; blank lines and lines starting with '#' are ignored.
/// Entries are lowercased.
StopwordSet parse_stopwords(std::istream& source);
StopwordSet load_stopwords_file(const std::string& path);

/// Lowercases, splits on whitespace, strips leading and trailing
/// non-alphanumeric characters from every piece and drops empty pieces and
/// stopwords. Internal hyphens and apostrophes survive.
std::vector<std::string> tokenize(std::string_view text, const StopwordSet& stopwords);

/// ASCII lowercase; other bytes pass through unchanged.
std::string to_lower(std::string_view text);

/// Strips leading/trailing whitespace (ASCII and common Unicode spaces).
std::string_view trim(std::string_view text);

/// Entity id → set of property ids. Ordered by entity id for deterministic
/// iteration.
struct EntityIdLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const;
};
struct PropertyIdLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const { return property_id_less(a, b); }
};

using PropertyIdSet = std::set<std::string, PropertyIdLess>;
using EntityPropertyMap = std::map<std::string, PropertyIdSet, EntityIdLess>;

/// Parses "<Qid>\t<Pid>,<Pid>,..." lines. Repeated entity lines merge by
/// union. When `known_properties` is given, every referenced id must be in
/// it; otherwise ValidationError lists the offenders.
EntityPropertyMap parse_entity_map(std::istream& source,
                                   const std::vector<PropertyRecord>* known_properties = nullptr);

EntityPropertyMap parse_entity_map_file(const std::string& path,
                                        const std::vector<PropertyRecord>* known_properties = nullptr);

}  // namespace propsearch
