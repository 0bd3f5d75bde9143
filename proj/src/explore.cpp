#include <dfgfold/explore.hpp>

#include <dfgfold/simulate.hpp>

#include <algorithm>
#include <atomic>
#include <thread>

#include <fmt/format.h>

namespace dfgfold
{

exploration_row failed_row( std::string name, std::string reason )
{
  exploration_row r;
  r.name = std::move( name );
  r.failure = std::move( reason );
  return r;
}

namespace
{

exploration_row evaluate( dataflow_graph const& g, cost_estimate const& original, named_config const& nc, explore_options const& opts )
{
  exploration_row row;
  row.name = nc.name;
  row.notation = nc.config.notation();
  try
  {
    auto r = fold_with_schedule( g, nc.config );
    auto const& cg = r.problem.cores;
    row.folding_factor = r.sched.folding_factor;
    for ( auto const& a : cg.arcs )
    {
      ++row.arcs_checked;
      if ( folding_delay( a.delay, a.latency, r.sched.slots[a.src], r.sched.slots[a.dst], r.sched.folding_factor ) < 0 )
        ++row.negative_arcs;
    }

    std::vector<std::pair<std::string, stimuli>> runs;
    runs.emplace_back( "random", random_stimuli( g, opts.samples, opts.seed, opts.range, opts.format ) );
    if ( opts.impulse_and_step )
    {
      runs.emplace_back( "impulse", impulse_stimuli( g, opts.samples, 1.0, opts.format ) );
      runs.emplace_back( "step", step_stimuli( g, opts.samples, 1.0, opts.format ) );
    }
    row.equivalent = true;
    for ( auto const& [kind, stim] : runs )
    {
      auto rep = check_equivalence( g, r.design, stim, opts.samples, opts.format );
      if ( !rep.pass )
      {
        row.equivalent = false;
        auto const& m = *rep.first_mismatch;
        row.failure = fmt::format( "{} stimulus: output {} differs at sample {} (expected {}, got {})", kind, m.output, m.sample, m.expected,
                                   m.actual );
        break;
      }
    }
    row.cost = estimate_cost( r.design, opts.weights, opts.delays );
    row.latency_proxy = row.cost.latency_proxy();
    row.benefit = folding_benefit( original, row.cost );
  }
  catch ( std::exception const& e )
  {
    row.equivalent = false;
    row.failure = e.what();
  }
  return row;
}

bool row_order( exploration_row const& a, exploration_row const& b )
{
  bool fa = !a.failure.empty(), fb = !b.failure.empty();
  if ( fa != fb )
    return fb;
  if ( fa )
    return a.name < b.name;
  return std::tie( a.cost.lut_units, a.latency_proxy, a.name ) < std::tie( b.cost.lut_units, b.latency_proxy, b.name );
}

} // namespace

std::vector<exploration_row> explore( dataflow_graph const& g, std::vector<named_config> const& configs, explore_options const& opts )
{
  std::vector<exploration_row> rows( configs.size() );
  auto original = estimate_cost( g, opts.weights, opts.delays );
  unsigned workers = opts.threads ? opts.threads : std::max( 1u, std::thread::hardware_concurrency() );
  workers = std::min<unsigned>( workers, static_cast<unsigned>( configs.size() ) );
  std::atomic<size_t> next{ 0 };
  auto work = [&] {
    for ( size_t i = next++; i < configs.size(); i = next++ )
      rows[i] = evaluate( g, original, configs[i], opts );
  };
  std::vector<std::thread> pool;
  for ( unsigned t = 1; t < workers; ++t )
    pool.emplace_back( work );
  if ( workers > 0 )
    work();
  for ( auto& t : pool )
    t.join();

  std::sort( rows.begin(), rows.end(), row_order );
  mark_pareto( rows );
  return rows;
}

namespace
{

std::vector<size_t> pareto_indices( std::vector<exploration_row> const& rows )
{
  std::vector<size_t> cand;
  for ( size_t i = 0; i < rows.size(); ++i )
  {
    if ( rows[i].equivalent && rows[i].failure.empty() )
      cand.push_back( i );
  }
  /* by latency, then area, then notation: a sweep keeps strictly improving area */
  std::sort( cand.begin(), cand.end(), [&]( size_t a, size_t b ) {
    auto const& x = rows[a];
    auto const& y = rows[b];
    return std::tie( x.latency_proxy, x.cost.lut_units, x.notation, x.name ) < std::tie( y.latency_proxy, y.cost.lut_units, y.notation, y.name );
  } );
  std::vector<size_t> front;
  for ( auto i : cand )
  {
    if ( front.empty() || rows[i].cost.lut_units < rows[front.back()].cost.lut_units )
      front.push_back( i );
  }
  return front;
}

} // namespace

std::vector<exploration_row> pareto( std::vector<exploration_row> const& rows )
{
  std::vector<exploration_row> out;
  for ( auto i : pareto_indices( rows ) )
    out.push_back( rows[i] );
  return out;
}

void mark_pareto( std::vector<exploration_row>& rows )
{
  for ( auto& r : rows )
    r.pareto = false;
  for ( auto i : pareto_indices( rows ) )
    rows[i].pareto = true;
}

namespace
{

std::string csv_quote( std::string const& s )
{
  if ( s.find_first_of( ",\"\n" ) == std::string::npos )
    return s;
  std::string out = "\"";
  for ( auto c : s )
  {
    if ( c == '"' )
      out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

std::string rows_to_csv( std::vector<exploration_row> const& rows )
{
  std::string out = "config,N,mult_units,lut_units,reg_bits,mux_inputs,tmin_proxy_ns,latency_proxy_ns,equivalent,pareto,name\n";
  for ( auto const& r : rows )
  {
    out += fmt::format( "{},{},{},{},{},{},{},{},{},{},{}\n", csv_quote( r.notation ), r.folding_factor, r.cost.mult_units, r.cost.lut_units,
                        r.cost.reg_bits, r.cost.mux_inputs, r.cost.tmin_proxy, r.latency_proxy, r.equivalent ? "pass" : "fail",
                        r.pareto ? 1 : 0, csv_quote( r.name ) );
  }
  return out;
}

nlohmann::json rows_to_json( std::vector<exploration_row> const& rows )
{
  auto arr = nlohmann::json::array();
  for ( auto const& r : rows )
  {
    nlohmann::json j = { { "name", r.name },
                         { "config", r.notation },
                         { "equivalent", r.equivalent },
                         { "pareto", r.pareto },
                         { "arcs_checked", r.arcs_checked },
                         { "negative_arcs", r.negative_arcs } };
    if ( !r.failure.empty() )
      j["failure"] = r.failure;
    else
      j["cost"] = cost_to_json( r.cost );
    if ( r.benefit )
    {
      auto const& b = *r.benefit;
      j["benefit"] = { { "beneficial", b.beneficial },
                       { "margin", b.margin },
                       { "overhead_below_saving", b.overhead_below_saving },
                       { "precondition", b.precondition },
                       { "agree", b.agree } };
    }
    arr.push_back( j );
  }
  return arr;
}

std::string gnuplot_script( std::string const& csv_path, std::string const& title )
{
  return fmt::format( R"(set datafile separator ","
set title "{}"
set xlabel "latency proxy [ns]"
set ylabel "lut units"
set key top right
set grid
plot "{}" using 8:($9 eq "pass" ? $4 : 1/0) skip 1 with points pt 7 title "configs", \
     "< awk -F, 'NR > 1 && $10 == 1' {} | sort -t, -k8 -g" using 8:4 with linespoints dt 2 title "pareto front"
)",
                      title, csv_path, csv_path );
}

} // namespace dfgfold
