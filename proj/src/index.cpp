#include "propsearch/index.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <zlib.h>

#include "propsearch/errors.hpp"

namespace propsearch {

namespace {

// Strings longer than this are treated as corruption rather than allocated.
constexpr std::uint32_t kMaxStringBytes = 1u << 24;
constexpr std::uint32_t kMaxDim = 1u << 16;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) {
    crc_ = crc32(crc_, static_cast<const Bytef*>(data), static_cast<uInt>(n));
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    written_ += n;
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void i64(std::int64_t v) {
    const auto u = static_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    bytes(b, 8);
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void str(std::string_view s) {
    if (s.size() > kMaxStringBytes) throw ArgumentError("string too long for index format");
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void trailer() {
    const auto crc = static_cast<std::uint32_t>(crc_);
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(crc >> (8 * i));
    out_.write(reinterpret_cast<const char*>(b), 4);
    written_ += 4;
  }

  std::size_t written() const { return written_; }

 private:
  std::ostream& out_;
  uLong crc_ = crc32(0L, Z_NULL, 0);
  std::size_t written_ = 0;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* data, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      throw CorruptionError(std::string("truncated stream while reading ") + what, offset_ + got);
    }
    crc_ = crc32(crc_, static_cast<const Bytef*>(data), static_cast<uInt>(n));
    offset_ += n;
  }
  std::uint8_t u8(const char* what) {
    std::uint8_t v = 0;
    bytes(&v, 1, what);
    return v;
  }
  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    bytes(b, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::int64_t i64(const char* what) {
    unsigned char b[8];
    bytes(b, 8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return static_cast<std::int64_t>(v);
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(const char* what) {
    const std::size_t at = offset_;
    const std::uint32_t n = u32(what);
    if (n > kMaxStringBytes) throw CorruptionError(std::string("implausible length for ") + what, at);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }
  void verify_trailer() {
    const auto expected = static_cast<std::uint32_t>(crc_);
    const std::size_t at = offset_;
    const std::uint32_t stored = u32("checksum");
    if (stored != expected) throw CorruptionError("checksum mismatch", at);
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw CorruptionError("unexpected trailing data", offset_);
    }
  }

  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  uLong crc_ = crc32(0L, Z_NULL, 0);
  std::size_t offset_ = 0;
};

bool same_bits(const std::optional<WordVector>& a, const std::optional<WordVector>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->size() == b->size() &&
         std::memcmp(a->data(), b->data(), a->size() * sizeof(float)) == 0;
}

}  // namespace

PropertyIndex::PropertyIndex(std::string model_id, std::size_t dim, bool use_description,
                             std::int64_t built_at, std::vector<IndexEntry> entries)
    : model_id_(std::move(model_id)),
      dim_(dim),
      use_description_(use_description),
      built_at_(built_at),
      entries_(std::move(entries)) {
  if (dim_ == 0) throw BuildError("index dimensionality must be positive");
  norms_.reserve(entries_.size());
  positions_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!is_property_id(e.id)) throw BuildError("invalid property id '" + e.id + "'");
    if (i > 0 && !property_id_less(entries_[i - 1].id, e.id)) {
      throw BuildError("entries not strictly ordered at '" + e.id + "'");
    }
    if (e.vector && e.vector->size() != dim_) {
      throw BuildError("vector of " + e.id + " has " + std::to_string(e.vector->size()) +
                       " components, expected " + std::to_string(dim_));
    }
    positions_.emplace(e.id, i);
    norms_.push_back(e.vector ? norm(*e.vector) : 0.0);
  }
}

std::optional<std::size_t> PropertyIndex::position_of(std::string_view property_id) const {
  auto it = positions_.find(property_id);
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

const IndexEntry* PropertyIndex::find(std::string_view property_id) const {
  auto pos = position_of(property_id);
  return pos ? &entries_[*pos] : nullptr;
}

bool operator==(const PropertyIndex& a, const PropertyIndex& b) {
  if (a.model_id_ != b.model_id_ || a.dim_ != b.dim_ || a.use_description_ != b.use_description_ ||
      a.built_at_ != b.built_at_ || a.entries_.size() != b.entries_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.id != y.id || x.label != y.label || x.aliases != y.aliases || !same_bits(x.vector, y.vector)) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> property_tokens(const PropertyRecord& record, bool use_description,
                                         const StopwordSet& stopwords) {
  auto tokens = tokenize(record.label, stopwords);
  if (use_description && record.description) {
    auto more = tokenize(*record.description, stopwords);
    tokens.insert(tokens.end(), std::make_move_iterator(more.begin()),
                  std::make_move_iterator(more.end()));
  }
  return tokens;
}

PropertyIndex build_index(const EmbeddingModel& model, std::span<const PropertyRecord> properties,
                          bool use_description, const StopwordSet& stopwords,
                          std::optional<std::int64_t> built_at, BuildReport* report) {
  if (model.dim() == 0 || model.empty()) throw BuildError("model is empty");
  if (properties.empty()) throw BuildError("no properties to index");

  std::vector<const PropertyRecord*> sorted;
  sorted.reserve(properties.size());
  for (const auto& p : properties) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](const PropertyRecord* a, const PropertyRecord* b) {
    return property_id_less(a->id, b->id);
  });

  BuildReport local;
  std::vector<IndexEntry> entries;
  entries.reserve(sorted.size());
  for (const PropertyRecord* p : sorted) {
    if (!entries.empty() && entries.back().id == p->id) {
      throw BuildError("duplicate property id '" + p->id + "'");
    }
    IndexEntry entry{p->id, p->label, p->aliases, std::nullopt};
    entry.vector = phrase_vector(model, property_tokens(*p, use_description, stopwords));
    if (!entry.vector) ++local.oov_properties;
    entries.push_back(std::move(entry));
  }
  local.properties = entries.size();
  if (report) *report = local;

  const std::int64_t stamp =
      built_at.value_or(std::chrono::duration_cast<std::chrono::seconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count());
  return PropertyIndex(model.model_id(), model.dim(), use_description, stamp, std::move(entries));
}

std::size_t save_index(const PropertyIndex& index, std::ostream& sink) {
  Writer w(sink);
  w.bytes(kIndexMagic, sizeof(kIndexMagic));
  w.u8(kIndexVersion);
  w.str(index.model_id());
  w.u32(static_cast<std::uint32_t>(index.dim()));
  w.u8(index.use_description() ? 1 : 0);
  w.i64(index.built_at());
  w.u32(static_cast<std::uint32_t>(index.size()));
  for (const auto& e : index.entries()) {
    w.str(e.id);
    w.str(e.label);
    w.u32(static_cast<std::uint32_t>(e.aliases.size()));
    for (const auto& a : e.aliases) w.str(a);
    w.u8(e.vector ? 1 : 0);
    if (e.vector) {
      for (float v : *e.vector) w.f32(v);
    }
  }
  w.trailer();
  if (!sink) throw IoError("write failure while saving index");
  return w.written();
}

PropertyIndex load_index(std::istream& source) {
  Reader r(source);
  char magic[4] = {};
  try {
    r.bytes(magic, sizeof(magic), "magic");
  } catch (const CorruptionError&) {
    throw FormatError("not a property index (stream shorter than magic)");
  }
  if (std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0) {
    throw FormatError("not a property index (bad magic)");
  }
  const std::uint8_t version = r.u8("version");
  if (version != kIndexVersion) {
    throw FormatError("unsupported index version " + std::to_string(version));
  }

  std::string model_id = r.str("model id");
  const std::size_t dim_at = r.offset();
  const std::uint32_t dim = r.u32("dimensions");
  if (dim == 0 || dim > kMaxDim) throw CorruptionError("implausible dimensionality", dim_at);
  const std::size_t flag_at = r.offset();
  const std::uint8_t use_description = r.u8("description flag");
  if (use_description > 1) throw CorruptionError("invalid description flag", flag_at);
  const std::int64_t built_at = r.i64("timestamp");
  const std::uint32_t count = r.u32("entry count");

  std::vector<IndexEntry> entries;
  entries.reserve(std::min<std::uint32_t>(count, 1u << 16));
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t entry_at = r.offset();
    IndexEntry e;
    e.id = r.str("property id");
    if (!is_property_id(e.id) || (!entries.empty() && !property_id_less(entries.back().id, e.id))) {
      throw CorruptionError("invalid or out-of-order property id", entry_at);
    }
    e.label = r.str("label");
    const std::uint32_t alias_count = r.u32("alias count");
    for (std::uint32_t k = 0; k < alias_count; ++k) e.aliases.push_back(r.str("alias"));
    const std::size_t present_at = r.offset();
    const std::uint8_t present = r.u8("presence flag");
    if (present > 1) throw CorruptionError("invalid presence flag", present_at);
    if (present) {
      WordVector v(dim);
      for (auto& c : v) c = r.f32("vector component");
      e.vector = std::move(v);
    }
    entries.push_back(std::move(e));
  }
  r.verify_trailer();
  return PropertyIndex(std::move(model_id), dim, use_description != 0, built_at,
                       std::move(entries));
}

void save_index_file(const PropertyIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_index(index, out);
}

PropertyIndex load_index_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index file '" + path + "'");
  return load_index(in);
}

void export_index_text(const PropertyIndex& index, std::ostream& sink) {
  for (const auto& e : index.entries()) {
    sink << e.id << '\t' << e.label << '\t';
    if (!e.vector) {
      sink << '-';
    } else {
      const std::size_t n = std::min<std::size_t>(4, e.vector->size());
      for (std::size_t i = 0; i < n; ++i) sink << (i ? " " : "") << (*e.vector)[i];
    }
    sink << '\n';
  }
}

}  // namespace propsearch
