/*!
  \file design.hpp
  \brief A folded graph together with the timing metadata needed to drive it.
*/

#pragma once

#include <dfgfold/graph.hpp>

#include <map>
#include <optional>
#include <string>

namespace dfgfold
{

enum class cost_bucket
{
  core,    /*!< one shared unit per class */
  remain,  /*!< operators that were not folded */
  overhead /*!< multiplexers, controller, inserted registers */
};

std::string_view bucket_name( cost_bucket b );
std::optional<cost_bucket> bucket_from_name( std::string_view name );

struct node_provenance
{
  cost_bucket bucket{cost_bucket::remain};
  std::optional<uint32_t> class_id;
  std::string origin; /*!< original node id, empty for inserted logic */
};

/*! \brief Register bits on the edge driving a port, split by bucket. */
struct register_split
{
  uint32_t core{0};
  uint32_t remain{0};
  uint32_t overhead{0};
};

struct fold_metadata
{
  uint32_t folding_factor{1};
  uint32_t latency_offset{0};
  /*! \brief mux id -> data input chosen for each counter value. */
  std::map<std::string, std::vector<uint32_t>> select_table;
  std::map<std::string, node_provenance> provenance;
  /*! \brief "node:port" of a driven port -> split of the registers on its edge. */
  std::map<std::string, register_split> edge_registers;
};

struct folded_design
{
  dataflow_graph graph;
  fold_metadata meta;
};

nlohmann::json metadata_to_json( fold_metadata const& m );
/*! \brief Throws `graph_error` when N or latency_offset is absent. */
fold_metadata metadata_from_json( nlohmann::json const& j );

std::string port_key( std::string_view node, uint32_t port );

} // namespace dfgfold
