/*!
  \file graph_io.hpp
  \brief JSON graph documents.

  Document layout:

      {"name": "...",
       "nodes":   [{"id": "m0", "kind": "mult", "width": 32, "latency": 0, "params": {}}],
       "edges":   [{"from": ["c0", 0], "to": ["m0", 1], "delay": 0}],
       "inputs":  ["x"],
       "outputs": ["y"]}

  Port indices are 0-based, `delay`, `width`, `latency` and `params` are
  optional.  Input/output list entries may be a node id or `[id, port]`.
*/

#pragma once

#include <dfgfold/graph.hpp>

#include <string>
#include <string_view>

namespace dfgfold
{

class parse_error : public graph_error
{
public:
  using graph_error::graph_error;
};

/*! \brief Builds a graph from a parsed document without checking invariants. */
dataflow_graph graph_from_json( nlohmann::json const& doc );

/*! \brief Parses and validates a graph document.

  Throws `parse_error` for malformed JSON (with line and column), schema
  errors and dangling references, and `graph_error` listing the violations
  when the graph is not valid.
*/
dataflow_graph parse_graph( std::string_view text );

nlohmann::json graph_to_json( dataflow_graph const& g );
std::string serialize_graph( dataflow_graph const& g );

nlohmann::json parse_json_text( std::string_view text );
std::string read_file( std::string const& path );
void write_file( std::string const& path, std::string const& content );

} // namespace dfgfold
