#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "propsearch/embeddings.hpp"
#include "propsearch/index.hpp"
#include "propsearch/ingest.hpp"

namespace propsearch::testing {

std::string data_path(const std::string& name);

EmbeddingModel make_model(const std::vector<std::pair<std::string, std::vector<float>>>& rows,
                          std::string model_id = "toy");

/// Random ranking problem: a model whose words are plain lowercase letters,
/// properties labelled with 1-3 of those words (sometimes OOV, sometimes
/// duplicated to force score ties) and a free-text query.
struct ToyInstance {
  EmbeddingModel model;
  std::vector<PropertyRecord> properties;
  std::string query;
  bool use_description = false;
};

ToyInstance random_toy_instance(std::mt19937_64& rng, std::size_t max_properties = 50,
                                std::size_t max_dim = 20);

/// Random index with arbitrary UTF-8 strings, absent vectors and arbitrary
/// finite float bit patterns.
PropertyIndex random_index(std::mt19937_64& rng, std::size_t max_entries = 12,
                           std::size_t max_dim = 16);

}  // namespace propsearch::testing
