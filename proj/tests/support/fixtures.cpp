#include "support/fixtures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

namespace propsearch::testing {

std::string data_path(const std::string& name) { return std::string(PROPSEARCH_TEST_DATA) + "/" + name; }

EmbeddingModel make_model(const std::vector<std::pair<std::string, std::vector<float>>>& rows,
                          std::string model_id) {
  std::vector<std::string> words;
  std::vector<float> values;
  const std::size_t dim = rows.empty() ? 0 : rows.front().second.size();
  for (const auto& [w, v] : rows) {
    words.push_back(w);
    values.insert(values.end(), v.begin(), v.end());
  }
  return EmbeddingModel(std::move(model_id), dim, std::move(words), std::move(values));
}

namespace {

// Letters-only words that cannot collide with the stopword list.
std::string toy_word(std::size_t i) {
  std::string w = "zq";
  do {
    w.push_back(static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i > 0);
  return w;
}

// Distinct words only: repeating a word would make sums colinear
// (v vs 3v), which are ties in exact arithmetic but not in floating point.
std::string random_phrase(std::mt19937_64& rng, std::size_t vocab, std::size_t oov_pool) {
  std::uniform_int_distribution<std::size_t> len(1, 3);
  std::uniform_int_distribution<std::size_t> pick(0, vocab + oov_pool - 1);
  std::set<std::size_t> chosen;
  const std::size_t n = len(rng);
  while (chosen.size() < n) chosen.insert(pick(rng));  // indices >= vocab are OOV
  std::vector<std::size_t> order(chosen.begin(), chosen.end());
  std::shuffle(order.begin(), order.end(), rng);
  std::string out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k) out += ' ';
    out += toy_word(order[k]);
  }
  return out;
}

}  // namespace

ToyInstance random_toy_instance(std::mt19937_64& rng, std::size_t max_properties,
                                std::size_t max_dim) {
  std::uniform_int_distribution<std::size_t> dim_dist(1, max_dim);
  std::uniform_int_distribution<std::size_t> vocab_dist(3, 40);
  std::uniform_int_distribution<std::size_t> prop_dist(1, max_properties);
  std::uniform_real_distribution<float> comp(-1.0f, 1.0f);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution rare(0.1);

  const std::size_t dim = dim_dist(rng);
  const std::size_t vocab = vocab_dist(rng);
  const std::size_t oov_pool = 3;

  std::vector<std::pair<std::string, std::vector<float>>> rows;
  for (std::size_t i = 0; i < vocab; ++i) {
    std::vector<float> v(dim);
    if (!rare(rng)) {
      for (auto& c : v) c = comp(rng);
    }
    rows.emplace_back(toy_word(i), std::move(v));
  }

  ToyInstance inst{make_model(rows), {}, {}, coin(rng)};
  const std::size_t n = prop_dist(rng);
  std::set<unsigned> ids;
  std::uniform_int_distribution<unsigned> id_dist(1, 5000);
  while (ids.size() < n) ids.insert(id_dist(rng));
  std::vector<unsigned> id_list(ids.begin(), ids.end());
  std::shuffle(id_list.begin(), id_list.end(), rng);

  for (unsigned id : id_list) {
    PropertyRecord rec;
    rec.id = "P" + std::to_string(id);
    if (!inst.properties.empty() && rare(rng)) {
      // Duplicate an earlier label (and description) to force an exact tie.
      const auto& other = inst.properties[std::uniform_int_distribution<std::size_t>(
          0, inst.properties.size() - 1)(rng)];
      rec.label = other.label;
      rec.description = other.description;
    } else {
      rec.label = random_phrase(rng, vocab, oov_pool);
      if (coin(rng)) rec.description = random_phrase(rng, vocab, oov_pool);
    }
    if (coin(rng)) rec.aliases.push_back(random_phrase(rng, vocab, oov_pool));
    inst.properties.push_back(std::move(rec));
  }
  inst.query = random_phrase(rng, vocab, oov_pool);
  return inst;
}

PropertyIndex random_index(std::mt19937_64& rng, std::size_t max_entries, std::size_t max_dim) {
  std::uniform_int_distribution<std::size_t> dim_dist(1, max_dim);
  std::uniform_int_distribution<std::size_t> count_dist(0, max_entries);
  std::uniform_int_distribution<std::size_t> len_dist(0, 12);
  std::uniform_int_distribution<std::uint32_t> bits;
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution rare(0.15);
  static const std::vector<std::string> pieces = {"a", "Z", " ", "é", "ß", "日本", "-", "'", "\t", "|", "0"};
  std::uniform_int_distribution<std::size_t> piece(0, pieces.size() - 1);

  auto random_string = [&] {
    std::string s;
    const std::size_t n = len_dist(rng);
    for (std::size_t i = 0; i < n; ++i) s += pieces[piece(rng)];
    return s;
  };

  const std::size_t dim = dim_dist(rng);
  std::set<unsigned> ids;
  const std::size_t n = count_dist(rng);
  std::uniform_int_distribution<unsigned> id_dist(1, 100000);
  while (ids.size() < n) ids.insert(id_dist(rng));

  std::vector<IndexEntry> entries;
  for (unsigned id : ids) {
    IndexEntry e;
    e.id = "P" + std::to_string(id);
    e.label = random_string();
    const std::size_t aliases = len_dist(rng) / 4;
    for (std::size_t k = 0; k < aliases; ++k) e.aliases.push_back(random_string());
    if (!rare(rng)) {
      WordVector v(dim);
      for (auto& c : v) {
        float f;
        do {
          f = std::bit_cast<float>(bits(rng));
        } while (!std::isfinite(f));
        c = f;
      }
      e.vector = std::move(v);
    }
    entries.push_back(std::move(e));
  }
  std::string model_id = random_string();
  const auto built_at = static_cast<std::int64_t>(bits(rng)) * (coin(rng) ? 1 : -1);
  return PropertyIndex(std::move(model_id), dim, coin(rng), built_at, std::move(entries));
}

}  // namespace propsearch::testing
