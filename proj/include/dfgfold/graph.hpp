/*!
  \file graph.hpp
  \brief Synchronous dataflow graph model.

  A graph is a set of operation nodes connected by edges that carry a
  register count.  Nodes are kept sorted by id so that every traversal in the
  library is deterministic and ties are broken by id.
*/

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace dfgfold
{

enum class node_kind
{
  add,
  sub,
  mult,
  negate,
  const_input,
  sine_lut,
  delay,
  mux,
  counter,
  input,
  output
};

std::string_view kind_name( node_kind kind );
std::optional<node_kind> kind_from_name( std::string_view name );

/*! \brief Short operator name as used in core notation (`prod`, `sin`, ...). */
std::string_view kind_short_name( node_kind kind );

/*! \brief True for kinds without state whose output depends on current inputs. */
bool is_combinational( node_kind kind );

struct node
{
  std::string id;
  node_kind kind{node_kind::add};
  uint32_t latency{0};
  uint32_t width{32};
  nlohmann::json params = nlohmann::json::object();
};

/*! \brief Number of input ports for a node, including the select port of a mux. */
uint32_t num_inputs( node const& n );
uint32_t num_outputs( node const& n );

struct edge
{
  uint32_t src{0};
  uint32_t src_port{0};
  uint32_t dst{0};
  uint32_t dst_port{0};
  uint32_t delay{0};

  bool operator==( edge const& ) const = default;
};

class graph_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief Immutable dataflow graph.

  Construct through `graph_builder`.  Node indices are positions in the
  id-sorted node vector; edges are sorted by (dst, dst_port, src, src_port).
*/
class dataflow_graph
{
public:
  dataflow_graph() = default;

  std::string const& name() const { return name_; }
  std::vector<node> const& nodes() const { return nodes_; }
  std::vector<edge> const& edges() const { return edges_; }
  node const& at( uint32_t index ) const { return nodes_.at( index ); }
  uint32_t size() const { return static_cast<uint32_t>( nodes_.size() ); }

  /*! \brief Node indices of the external input and output nodes, in port order. */
  std::vector<uint32_t> const& inputs() const { return inputs_; }
  std::vector<uint32_t> const& outputs() const { return outputs_; }

  std::optional<uint32_t> find( std::string_view id ) const;
  uint32_t index_of( std::string_view id ) const;

  /*! \brief Edge indices entering `node`, possibly several per port in invalid graphs. */
  std::vector<uint32_t> const& fanin( uint32_t node ) const { return fanin_[node]; }
  std::vector<uint32_t> const& fanout( uint32_t node ) const { return fanout_[node]; }

  /*! \brief The unique edge driving input `port` of `node`, if any. */
  std::optional<uint32_t> driver( uint32_t node, uint32_t port ) const;

  std::vector<uint32_t> nodes_of_kind( node_kind kind ) const;

private:
  friend class graph_builder;

  std::string name_;
  std::vector<node> nodes_;
  std::vector<edge> edges_;
  std::vector<uint32_t> inputs_;
  std::vector<uint32_t> outputs_;
  std::unordered_map<std::string, uint32_t> index_;
  std::vector<std::vector<uint32_t>> fanin_;
  std::vector<std::vector<uint32_t>> fanout_;
};

/*! \brief Collects nodes and edges by id and produces a `dataflow_graph`.

  `build` throws `graph_error` on duplicate ids and dangling references.  It
  does not check the structural invariants; use `validate` for that.
*/
class graph_builder
{
public:
  explicit graph_builder( std::string name = {} ) : name_( std::move( name ) ) {}

  graph_builder& add_node( node n );
  graph_builder& add_node( std::string id, node_kind kind, nlohmann::json params = nlohmann::json::object() );
  graph_builder& add_edge( std::string src, uint32_t src_port, std::string dst, uint32_t dst_port, uint32_t delay = 0 );
  graph_builder& add_edge( std::string src, std::string dst, uint32_t dst_port = 0, uint32_t delay = 0 )
  {
    return add_edge( std::move( src ), 0, std::move( dst ), dst_port, delay );
  }
  graph_builder& add_input( std::string id );
  graph_builder& add_output( std::string id );
  graph_builder& set_name( std::string name )
  {
    name_ = std::move( name );
    return *this;
  }

  bool has_node( std::string_view id ) const;

  dataflow_graph build() const;

private:
  struct pending_edge
  {
    std::string src;
    uint32_t src_port;
    std::string dst;
    uint32_t dst_port;
    uint32_t delay;
  };

  std::string name_;
  std::vector<node> nodes_;
  std::unordered_map<std::string, size_t> ids_;
  std::vector<pending_edge> edges_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

/*! \brief Copies every node, edge and port of `g` into a fresh builder. */
graph_builder to_builder( dataflow_graph const& g );

enum class violation_kind
{
  bad_port,
  multiply_driven,
  unconnected_port,
  zero_delay_cycle,
  width_mismatch,
  bad_params,
  bad_io_list
};

std::string_view violation_name( violation_kind kind );

struct violation
{
  violation_kind kind;
  std::string message;
  std::vector<std::string> nodes;
};

/*! \brief Reports every invariant violation; the result is empty iff `g` can be simulated. */
std::vector<violation> validate( dataflow_graph const& g );

/*! \brief Topological order over zero-delay edges.

  Edges leaving stateful nodes (delay, counter) and edges with a positive
  delay are not ordering constraints.  Among ready nodes the smallest id goes
  first.  Throws `graph_error` on a zero-delay cycle.
*/
std::vector<uint32_t> topo_order( dataflow_graph const& g );

/*! \brief True if the edge forces its source to be evaluated before its sink. */
bool is_combinational_edge( dataflow_graph const& g, edge const& e );

/*! \brief Folds chains of delay nodes not listed in `protected_ids` into edge delays.

  Every path source -> d1 -> ... -> dk -> sink through unprotected delay
  nodes is replaced by a single edge whose delay is the sum of the edge
  delays plus k.  Delay nodes that sit on a loop consisting only of
  unprotected delay nodes have no source and are left untouched.
*/
dataflow_graph canonicalize( dataflow_graph const& g, std::vector<std::string> const& protected_ids = {} );

/*! \brief Histogram of node kinds, keyed by `kind_name`. */
std::unordered_map<std::string, uint32_t> census( dataflow_graph const& g );

} // namespace dfgfold
