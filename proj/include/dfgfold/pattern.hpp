/*!
  \file pattern.hpp
  \brief Folding-core patterns, their embeddings into a circuit, and core selection.
*/

#pragma once

#include <dfgfold/graph.hpp>

#include <string>
#include <vector>

namespace dfgfold
{

/*! \brief (template node index, port) */
struct template_port
{
  uint32_t node{0};
  uint32_t port{0};

  auto operator<=>( template_port const& ) const = default;
};

/*! \brief A small connected template graph describing one folding core.

  The template contains operation nodes only.  Its boundary inputs are the
  input ports without an internal driver; its boundary outputs are the output
  ports without an internal consumer.  Internal nodes may still fan out to the
  rest of the circuit.
*/
struct core_pattern
{
  std::string name;
  dataflow_graph templ;
  std::vector<template_port> boundary_inputs;
  std::vector<template_port> boundary_outputs;

  uint32_t size() const { return templ.size(); }
  /*! \brief Kind multiset, e.g. `{2add,2delay,2prod}`. */
  std::string notation() const;
};

/*! \brief Checks the template and derives its boundary.  Throws `graph_error`. */
core_pattern make_pattern( std::string name, dataflow_graph templ );

/*! \brief Parses a pattern document (graph schema plus optional boundary lists,
    which must agree with the derived boundary when present). */
core_pattern parse_pattern( std::string_view text );
nlohmann::json pattern_to_json( core_pattern const& p );

/*! \brief Injective map from template node index to circuit node index. */
struct core_instance
{
  std::vector<uint32_t> nodes;

  auto operator<=>( core_instance const& ) const = default;
};

struct core_class
{
  core_pattern pattern;
  std::vector<core_instance> instances;
};

struct folding_config
{
  std::vector<core_class> classes;

  /*! \brief Table-style notation, e.g. `5{2add,2delay,2prod}, 2{add,delay,prod}`. */
  std::string notation() const;
  /*! \brief Circuit nodes covered by any instance. */
  std::vector<uint32_t> covered_nodes() const;
};

/*! \brief All embeddings of `pattern` in `g` (possibly overlapping), sorted.

  An embedding preserves node kinds, latencies, port indices and edge delays,
  and is an isomorphism onto the induced subgraph: every circuit edge between
  two matched nodes corresponds to a template edge.  The search is a
  backtracking match that extends along template edges, so each candidate is
  a neighbour of an already matched node.
*/
std::vector<core_instance> match_pattern( dataflow_graph const& g, core_pattern const& pattern );

/*! \brief Describes what is wrong with one embedding; empty when it is valid. */
std::vector<std::string> embedding_errors( dataflow_graph const& g, core_pattern const& pattern, core_instance const& inst );

struct cover_request
{
  core_pattern pattern;
  std::vector<core_instance> candidates;
  uint32_t count{0};
};

class cover_error : public std::runtime_error
{
public:
  cover_error( uint32_t class_index, std::string const& msg ) : std::runtime_error( msg ), class_index( class_index ) {}
  uint32_t class_index;
};

/*! \brief Picks `count` pairwise-disjoint instances per class.

  Classes are filled largest pattern first (ties keep request order); each
  class takes its candidates in their sorted order whenever they do not touch
  an already used node.  Throws `cover_error` naming the first class that
  cannot be filled.  The returned classes follow the request order.
*/
folding_config select_cover( std::vector<cover_request> const& requests );

/*! \brief Exhaustive variant of `select_cover` for small circuits: finds a
    disjoint selection whenever one exists. */
folding_config select_cover_exact( std::vector<cover_request> const& requests, uint32_t graph_size );

enum class config_violation_kind
{
  empty_class,
  overlap,
  isomorphism
};

struct config_violation
{
  config_violation_kind kind;
  std::string message;
};

std::string_view config_violation_name( config_violation_kind k );

/*! \brief Verifies disjointness and isomorphism of every instance. */
std::vector<config_violation> check_config( dataflow_graph const& g, folding_config const& config );

} // namespace dfgfold
