/*!
  \file config_io.hpp
  \brief Folding configuration documents.

  Layout:

      {"name": "fir_n14_dpa",
       "classes": [{"pattern": "delay_prod_add", "count": 14},
                   {"pattern": "patterns/custom.json", "count": 2,
                    "instances": [{"m": "m01", "a": "s01"}, {"m": "m02", "a": "s02"}]}]}

  `pattern` is a file path relative to the document, the name of a built-in
  pattern, or an inline pattern object.  `instances` optionally fixes the
  embedding of each instance as a map from template node id to circuit node
  id; without it the instances are chosen automatically.
*/

#pragma once

#include <dfgfold/graph.hpp>
#include <dfgfold/pattern.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dfgfold
{

struct class_entry
{
  core_pattern pattern;
  uint32_t count{0};
  std::optional<std::vector<std::map<std::string, std::string>>> instances;
};

struct config_document
{
  std::string name;
  std::vector<class_entry> classes;
};

/*! \brief Resolves a pattern reference (file, built-in name or inline object).  Throws `parse_error`. */
core_pattern resolve_pattern( nlohmann::json const& ref, std::filesystem::path const& base_dir );

config_document parse_config_document( std::string_view text, std::filesystem::path const& base_dir = "." );
config_document load_config_document( std::filesystem::path const& path );

/*! \brief Builds the folding config, matching and selecting instances for classes without explicit ones.

  Throws `parse_error` for explicit instances that are not embeddings and
  `cover_error` when a class cannot be filled.
*/
folding_config instantiate( dataflow_graph const& g, config_document const& doc );

/*! \brief Self-contained document with inline patterns and explicit instances. */
nlohmann::json config_to_json( dataflow_graph const& g, folding_config const& config, std::string const& name = {} );

} // namespace dfgfold
