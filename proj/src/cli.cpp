#include <dfgfold/cli.hpp>

#include <dfgfold/bench.hpp>
#include <dfgfold/config_io.hpp>
#include <dfgfold/cost.hpp>
#include <dfgfold/explore.hpp>
#include <dfgfold/fold.hpp>
#include <dfgfold/graph_io.hpp>
#include <dfgfold/simulate.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace fs = std::filesystem;

namespace dfgfold
{

namespace
{

struct global_options
{
  uint64_t seed{1};
  uint32_t frac_bits{16};
  std::string weights_path;
  std::string delays_path;

  fixed_format format() const { return fixed_format{ frac_bits }; }

  weight_table weights() const
  {
    auto path = weights_path;
    if ( path.empty() )
    {
      if ( auto const* env = std::getenv( "DFGFOLD_WEIGHTS" ); env && *env )
        path = env;
    }
    if ( path.empty() )
      return default_weights();
    try
    {
      return parse_weights( read_file( path ) );
    }
    catch ( parse_error const& e )
    {
      throw parse_error( fmt::format( "weight table '{}': {}", path, e.what() ) );
    }
  }

  delay_table delays() const
  {
    if ( delays_path.empty() )
      return default_delays();
    try
    {
      return parse_delays( read_file( delays_path ) );
    }
    catch ( parse_error const& e )
    {
      throw parse_error( fmt::format( "delay table '{}': {}", delays_path, e.what() ) );
    }
  }
};

dataflow_graph load_graph( std::string const& path )
{
  try
  {
    return parse_graph( read_file( path ) );
  }
  catch ( graph_error const& e )
  {
    throw graph_error( fmt::format( "graph '{}': {}", path, e.what() ) );
  }
}

folding_config load_config( dataflow_graph const& g, std::string const& path )
{
  auto doc = load_config_document( path );
  return instantiate( g, doc );
}

folded_design load_folded( std::string const& graph_path, std::string meta_path )
{
  if ( meta_path.empty() )
    meta_path = fs::path( graph_path ).replace_extension( ".meta.json" ).string();
  folded_design d;
  d.graph = load_graph( graph_path );
  d.meta = metadata_from_json( parse_json_text( read_file( meta_path ) ) );
  return d;
}

void emit( std::ostream& out, std::string const& path, std::string const& content )
{
  if ( path.empty() || path == "-" )
    out << content;
  else
    write_file( path, content );
}

std::string dump( nlohmann::json const& j )
{
  return j.dump( 2 ) + "\n";
}

nlohmann::json instance_json( dataflow_graph const& g, core_pattern const& p, core_instance const& inst )
{
  nlohmann::json j = nlohmann::json::object();
  for ( uint32_t t = 0; t < inst.nodes.size(); ++t )
    j[p.templ.at( t ).id] = g.at( inst.nodes[t] ).id;
  return j;
}

nlohmann::json mismatch_json( mismatch const& m )
{
  return { { "sample", m.sample }, { "output", m.output }, { "expected", m.expected }, { "actual", m.actual } };
}

/* random, impulse and step runs; returns the report and whether all passed */
std::pair<nlohmann::json, bool> equivalence_runs( dataflow_graph const& g, folded_design const& d, uint64_t samples, uint64_t seed,
                                                  fixed_format const& fmt )
{
  nlohmann::json runs = nlohmann::json::array();
  bool all = true;
  std::vector<std::pair<std::string, stimuli>> stims;
  stims.emplace_back( "random", random_stimuli( g, samples, seed, 1.0, fmt ) );
  stims.emplace_back( "impulse", impulse_stimuli( g, samples, 1.0, fmt ) );
  stims.emplace_back( "step", step_stimuli( g, samples, 1.0, fmt ) );
  for ( auto const& [kind, s] : stims )
  {
    auto rep = check_equivalence( g, d, s, samples, fmt );
    nlohmann::json r = { { "stimulus", kind }, { "pass", rep.pass }, { "samples", rep.samples } };
    if ( rep.first_mismatch )
      r["first_mismatch"] = mismatch_json( *rep.first_mismatch );
    runs.push_back( r );
    all = all && rep.pass;
  }
  return { runs, all };
}

std::vector<fs::path> config_files( std::string const& path )
{
  std::vector<fs::path> files;
  if ( fs::is_directory( path ) )
  {
    for ( auto const& entry : fs::directory_iterator( path ) )
    {
      if ( entry.is_regular_file() && entry.path().extension() == ".json" )
        files.push_back( entry.path() );
    }
    std::sort( files.begin(), files.end() );
  }
  else if ( fs::is_regular_file( path ) )
    files.emplace_back( path );
  else
    throw std::runtime_error( fmt::format( "config path '{}' is neither a file nor a directory", path ) );
  if ( files.empty() )
    throw std::runtime_error( fmt::format( "no .json config documents in '{}'", path ) );
  return files;
}

} // namespace

int run( std::vector<std::string> const& args, std::ostream& out, std::ostream& err )
{
  CLI::App app{ "Dataflow graph folding toolchain", "dfgfold" };
  app.require_subcommand( 1 );
  app.fallthrough();

  global_options glob;
  app.add_option( "--seed", glob.seed, "Seed for random stimuli" )->capture_default_str();
  app.add_option( "--frac-bits", glob.frac_bits, "Fractional bits of the 32-bit fixed-point format" )
      ->check( CLI::Range( 0u, 30u ) )
      ->capture_default_str();
  app.add_option( "--weights", glob.weights_path,
                  "JSON object of node kind -> lut units overriding the defaults (default: $DFGFOLD_WEIGHTS if set)" );
  app.add_option( "--delays", glob.delays_path, "JSON object of node kind -> combinational delay in ns" );

  std::function<int()> action;

  /* gen */
  std::string bench, stim_dir, out_path;
  uint32_t taps = 16;
  uint64_t samples = 1000;
  auto* gen = app.add_subcommand( "gen", "Write a benchmark graph document" );
  gen->add_option( "bench", bench, "Benchmark name" )->required()->check( CLI::IsMember( bench_names() ) );
  auto* taps_opt = gen->add_option( "--taps", taps, "FIR tap count (fir only)" )->check( CLI::Range( 1u, 4096u ) )->capture_default_str();
  gen->add_option( "--with-stimuli", stim_dir, "Also write impulse, step and seeded random stimulus CSV files to this directory" );
  gen->add_option( "--samples", samples, "Stimulus length" )->capture_default_str();
  gen->add_option( "-o,--output", out_path, "Output file (default stdout)" );
  gen->callback( [&] {
    action = [&] {
      if ( taps_opt->count() && bench != "fir" )
        throw std::invalid_argument( "--taps only applies to the fir benchmark" );
      auto g = bench == "fir" ? gen_fir( taps, default_fir_coefficients( taps ) ) : *gen_bench( bench );
      emit( out, out_path, serialize_graph( g ) );
      if ( !stim_dir.empty() )
      {
        auto fmt = glob.format();
        fs::create_directories( stim_dir );
        auto base = fs::path( stim_dir ) / bench;
        write_file( base.string() + "_impulse.csv", stimuli_to_csv( impulse_stimuli( g, samples, 1.0, fmt ), fmt ) );
        write_file( base.string() + "_step.csv", stimuli_to_csv( step_stimuli( g, samples, 1.0, fmt ), fmt ) );
        write_file( base.string() + "_random.csv", stimuli_to_csv( random_stimuli( g, samples, glob.seed, 1.0, fmt ), fmt ) );
      }
      return exit_code::ok;
    };
  } );

  /* match */
  std::string graph_path, pattern_ref;
  std::optional<uint32_t> select_count;
  auto* match = app.add_subcommand( "match", "List the embeddings of a core pattern" );
  match->add_option( "--graph", graph_path, "Graph document" )->required();
  match->add_option( "--pattern", pattern_ref, "Pattern document or built-in pattern name" )->required();
  match->add_option( "--select", select_count, "Also pick this many disjoint instances" );
  match->add_option( "-o,--output", out_path, "Output file (default stdout)" );
  match->callback( [&] {
    action = [&] {
      auto g = load_graph( graph_path );
      auto p = resolve_pattern( nlohmann::json( pattern_ref ), fs::current_path() );
      auto found = match_pattern( g, p );
      nlohmann::json j = { { "pattern", p.name }, { "notation", p.notation() }, { "count", found.size() } };
      j["embeddings"] = nlohmann::json::array();
      for ( auto const& inst : found )
        j["embeddings"].push_back( instance_json( g, p, inst ) );
      if ( select_count )
      {
        auto cfg = select_cover( { cover_request{ p, found, *select_count } } );
        j["selected"] = nlohmann::json::array();
        for ( auto const& inst : cfg.classes.front().instances )
          j["selected"].push_back( instance_json( g, p, inst ) );
      }
      emit( out, out_path, dump( j ) );
      return exit_code::ok;
    };
  } );

  /* schedule */
  std::string config_path;
  std::optional<uint32_t> hint;
  auto* sched = app.add_subcommand( "schedule", "List-schedule a folding configuration and report slots and arc delays" );
  sched->add_option( "--graph", graph_path, "Graph document" )->required();
  sched->add_option( "--config", config_path, "Folding configuration document" )->required();
  sched->add_option( "-N,--folding-factor", hint, "Schedule with exactly this folding factor" )->check( CLI::PositiveNumber );
  sched->add_option( "-o,--output", out_path, "Output file (default stdout)" );
  sched->callback( [&] {
    action = [&] {
      auto g = load_graph( graph_path );
      auto p = prepare_fold( g, load_config( g, config_path ) );
      auto s = list_schedule( p.cores, hint );
      emit( out, out_path, dump( schedule_to_json( p.cores, s ) ) );
      return exit_code::ok;
    };
  } );

  /* fold */
  std::string schedule_path, meta_path;
  auto* fold_cmd = app.add_subcommand( "fold", "Fold a graph; writes the folded graph and a metadata sidecar" );
  fold_cmd->add_option( "--graph", graph_path, "Graph document" )->required();
  fold_cmd->add_option( "--config", config_path, "Folding configuration document" )->required();
  fold_cmd->add_option( "--schedule", schedule_path, "Schedule report to use instead of list scheduling" );
  fold_cmd->add_option( "-N,--folding-factor", hint, "List-schedule with exactly this folding factor" )->check( CLI::PositiveNumber );
  fold_cmd->add_option( "-o,--output", out_path, "Folded graph document" )->required();
  fold_cmd->add_option( "--meta", meta_path, "Metadata sidecar (default: <output stem>.meta.json)" );
  fold_cmd->callback( [&] {
    action = [&] {
      auto g = load_graph( graph_path );
      auto p = prepare_fold( g, load_config( g, config_path ) );
      auto s = schedule_path.empty() ? list_schedule( p.cores, hint ) : schedule_from_json( p.cores, parse_json_text( read_file( schedule_path ) ) );
      auto d = fold( p, s );
      write_file( out_path, serialize_graph( d.graph ) );
      auto meta = meta_path.empty() ? fs::path( out_path ).replace_extension( ".meta.json" ).string() : meta_path;
      write_file( meta, dump( metadata_to_json( d.meta ) ) );
      return exit_code::ok;
    };
  } );

  /* simulate */
  std::string stim_path;
  std::optional<uint64_t> cycles;
  std::string generated;
  auto* sim = app.add_subcommand( "simulate", "Cycle-accurate simulation; writes an output trace CSV" );
  sim->add_option( "--graph", graph_path, "Graph document" )->required();
  auto* stim_opt = sim->add_option( "--stimuli", stim_path, "Stimulus CSV (cycle column plus one column per input)" );
  sim->add_option( "--generate", generated, "Generated stimulus instead of a file" )
      ->check( CLI::IsMember( { "random", "impulse", "step" } ) )
      ->excludes( stim_opt );
  sim->add_option( "--cycles", cycles, "Cycles to simulate (default: stimulus length)" );
  sim->add_option( "--samples", samples, "Length of a generated stimulus" )->capture_default_str();
  sim->add_option( "-o,--output", out_path, "Output file (default stdout)" );
  sim->callback( [&] {
    action = [&] {
      auto g = load_graph( graph_path );
      auto fmt = glob.format();
      stimuli s;
      if ( !stim_path.empty() )
        s = parse_stimuli_csv( read_file( stim_path ), fmt );
      else if ( generated == "impulse" )
        s = impulse_stimuli( g, samples, 1.0, fmt );
      else if ( generated == "step" )
        s = step_stimuli( g, samples, 1.0, fmt );
      else if ( generated == "random" )
        s = random_stimuli( g, samples, glob.seed, 1.0, fmt );
      else
        throw std::invalid_argument( "simulate needs --stimuli or --generate" );
      auto t = simulate( g, s, cycles.value_or( s.length() ), fmt );
      emit( out, out_path, trace_to_csv( t, fmt ) );
      return exit_code::ok;
    };
  } );

  /* verify */
  std::string original_path, folded_path;
  auto* verify = app.add_subcommand( "verify", "Check a folded design against its original on random, impulse and step stimuli" );
  verify->add_option( "--original", original_path, "Original graph document" )->required();
  auto* vcfg = verify->add_option( "--config", config_path, "Folding configuration to fold and check" );
  auto* vfolded = verify->add_option( "--folded", folded_path, "Previously folded graph (with its metadata sidecar)" );
  vcfg->excludes( vfolded );
  verify->add_option( "--meta", meta_path, "Metadata sidecar of --folded" )->needs( vfolded );
  verify->add_option( "--samples", samples, "Samples per stimulus" )->capture_default_str();
  verify->add_option( "-o,--output", out_path, "Report file (default stdout)" );
  verify->callback( [&] {
    action = [&] {
      if ( config_path.empty() && folded_path.empty() )
        throw std::invalid_argument( "verify needs --config or --folded" );
      auto g = load_graph( original_path );
      folded_design d = folded_path.empty() ? fold_with_schedule( g, load_config( g, config_path ) ).design : load_folded( folded_path, meta_path );
      auto [runs, pass] = equivalence_runs( g, d, samples, glob.seed, glob.format() );
      nlohmann::json j = { { "N", d.meta.folding_factor }, { "latency_offset", d.meta.latency_offset }, { "frac_bits", glob.frac_bits },
                           { "seed", glob.seed },        { "runs", runs },                               { "pass", pass } };
      emit( out, out_path, dump( j ) );
      return pass ? exit_code::ok : exit_code::verification_failure;
    };
  } );

  /* explore */
  std::string configs_path, reference, csv_path, json_path, gnuplot_path;
  unsigned threads = 0;
  auto* expl = app.add_subcommand( "explore", "Fold, verify and cost a set of configurations; CSV report with Pareto flags" );
  expl->add_option( "--graph", graph_path, "Graph document" )->required();
  auto* ecfg = expl->add_option( "--configs", configs_path, "Directory of configuration documents (or a single document)" );
  auto* eref = expl->add_option( "--reference", reference, "Use the built-in reference configurations of this benchmark" )
                   ->check( CLI::IsMember( bench_names() ) );
  ecfg->excludes( eref );
  expl->add_option( "--samples", samples, "Samples per stimulus" )->capture_default_str();
  expl->add_option( "--threads", threads, "Worker threads (0: all cores)" )->capture_default_str();
  expl->add_option( "--csv", csv_path, "CSV report file (default stdout)" );
  expl->add_option( "--json", json_path, "JSON report with cost breakdowns" );
  expl->add_option( "--emit-gnuplot", gnuplot_path, "Write a gnuplot script plotting the CSV report" );
  expl->callback( [&] {
    action = [&] {
      auto g = load_graph( graph_path );
      std::vector<named_config> named;
      std::vector<exploration_row> failed;
      if ( !reference.empty() )
      {
        for ( auto const& req : reference_configs( reference ) )
        {
          try
          {
            named.push_back( { req.name, instantiate( g, req ) } );
          }
          catch ( std::exception const& e )
          {
            failed.push_back( failed_row( req.name, e.what() ) );
          }
        }
      }
      else if ( !configs_path.empty() )
      {
        for ( auto const& file : config_files( configs_path ) )
        {
          auto name = file.stem().string();
          try
          {
            auto doc = load_config_document( file );
            if ( !doc.name.empty() )
              name = doc.name;
            named.push_back( { name, instantiate( g, doc ) } );
          }
          catch ( std::exception const& e )
          {
            failed.push_back( failed_row( name, e.what() ) );
          }
        }
      }
      else
        throw std::invalid_argument( "explore needs --configs or --reference" );

      explore_options opts;
      opts.samples = samples;
      opts.seed = glob.seed;
      opts.format = glob.format();
      opts.weights = glob.weights();
      opts.delays = glob.delays();
      opts.threads = threads;
      auto rows = explore( g, named, opts );
      rows.insert( rows.end(), failed.begin(), failed.end() );
      emit( out, csv_path, rows_to_csv( rows ) );
      if ( !json_path.empty() )
      {
        nlohmann::json j = { { "graph", g.name() }, { "frac_bits", glob.frac_bits }, { "seed", glob.seed }, { "samples", samples },
                             { "rows", rows_to_json( rows ) } };
        write_file( json_path, dump( j ) );
      }
      if ( !gnuplot_path.empty() )
        write_file( gnuplot_path, gnuplot_script( csv_path.empty() ? "report.csv" : csv_path, g.name() ) );
      bool all = std::all_of( rows.begin(), rows.end(), []( auto const& r ) { return r.equivalent; } );
      return all ? exit_code::ok : exit_code::verification_failure;
    };
  } );

  /* configs */
  std::string out_dir;
  auto* cfgs = app.add_subcommand( "configs", "Write the reference folding configurations of a benchmark" );
  cfgs->add_option( "bench", bench, "Benchmark name" )->required()->check( CLI::IsMember( bench_names() ) );
  cfgs->add_option( "--out-dir", out_dir, "Directory for one document per configuration" )->required();
  cfgs->callback( [&] {
    action = [&] {
      fs::create_directories( out_dir );
      for ( auto const& req : reference_configs( bench ) )
        write_file( ( fs::path( out_dir ) / ( req.name + ".json" ) ).string(), dump( request_to_json( req ) ) );
      return exit_code::ok;
    };
  } );

  /* cost */
  auto* cost = app.add_subcommand( "cost", "Area and timing proxies of a graph, a folded design or a configuration" );
  cost->add_option( "--graph", graph_path, "Graph document (the original when --config is given)" )->required();
  auto* ccfg = cost->add_option( "--config", config_path, "Fold with this configuration and compare against the original" );
  auto* cmeta = cost->add_option( "--meta", meta_path, "Metadata sidecar when --graph is a folded design" );
  ccfg->excludes( cmeta );
  cost->add_option( "-o,--output", out_path, "Output file (default stdout)" );
  cost->callback( [&] {
    action = [&] {
      auto weights = glob.weights();
      auto delays = glob.delays();
      nlohmann::json j;
      if ( !meta_path.empty() )
        j = cost_to_json( estimate_cost( load_folded( graph_path, meta_path ), weights, delays ) );
      else
      {
        auto g = load_graph( graph_path );
        auto original = estimate_cost( g, weights, delays );
        j = cost_to_json( original );
        if ( !config_path.empty() )
        {
          auto folded = estimate_cost( fold_with_schedule( g, load_config( g, config_path ) ).design, weights, delays );
          auto b = folding_benefit( original, folded );
          j = { { "original", j },
                { "folded", cost_to_json( folded ) },
                { "benefit",
                  { { "beneficial", b.beneficial },
                    { "margin", b.margin },
                    { "overhead_below_saving", b.overhead_below_saving },
                    { "precondition", b.precondition },
                    { "agree", b.agree } } } };
        }
      }
      emit( out, out_path, dump( j ) );
      return exit_code::ok;
    };
  } );

  try
  {
    std::vector<std::string> reversed( args.rbegin(), args.rend() );
    app.parse( reversed );
  }
  catch ( CLI::ParseError const& e )
  {
    if ( app.get_subcommands().empty() )
    {
      for ( size_t i = 0; i < args.size(); ++i )
      {
        auto const& a = args[i];
        if ( a.starts_with( "-" ) )
        {
          if ( a.find( '=' ) == std::string::npos && ( a == "--seed" || a == "--frac-bits" || a == "--weights" || a == "--delays" ) )
            ++i;
          continue;
        }
        std::vector<std::string> names;
        for ( auto const* sc : app.get_subcommands( []( CLI::App* ) { return true; } ) )
          names.push_back( sc->get_name() );
        err << fmt::format( "error: unknown subcommand '{}'; expected one of: {}\n", a, fmt::join( names, ", " ) );
        return exit_code::user_error;
      }
    }
    auto code = app.exit( e, out, err );
    return code == 0 ? exit_code::ok : exit_code::user_error;
  }

  try
  {
    return action();
  }
  catch ( std::exception const& e )
  {
    err << "error: " << e.what() << "\n";
    return exit_code::user_error;
  }
}

int run( int argc, char** argv )
{
  std::vector<std::string> args( argv + 1, argv + argc );
  return run( args, std::cout, std::cerr );
}

} // namespace dfgfold
