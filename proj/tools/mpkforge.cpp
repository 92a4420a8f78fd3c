// mpkforge: sparse matrix power kernel laboratory.
//
// Subcommands cover matrix generation, partition/plan analysis, verified
// kernel runs, parameter sweeps, roofline and cache-traffic reports, and
// Chebyshev time propagation. All reports are JSON or CSV and embed a run
// manifest; rerunning with the same manifest reproduces the numeric
// content byte for byte (wall-clock fields live under "timing").

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpk/ca.hpp"
#include "mpk/chebyshev.hpp"
#include "mpk/crs.hpp"
#include "mpk/generate.hpp"
#include "mpk/kernels.hpp"
#include "mpk/matrix_market.hpp"
#include "mpk/partition.hpp"
#include "mpk/perf_model.hpp"
#include "mpk/rank_plan.hpp"
#include "mpk/rng.hpp"

using json = nlohmann::json;
using namespace mpk;

namespace {

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class VerifyError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::int64_t parse_size(const std::string& s) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw UsageError("bad size '" + s + "'");
  }
  std::string suffix = s.substr(pos);
  std::int64_t mult = 1;
  if (suffix == "KiB")
    mult = 1ll << 10;
  else if (suffix == "MiB")
    mult = 1ll << 20;
  else if (suffix == "GiB")
    mult = 1ll << 30;
  else if (!suffix.empty())
    throw UsageError("bad size suffix '" + suffix + "' (use KiB|MiB|GiB)");
  const std::int64_t bytes = static_cast<std::int64_t>(v * mult);
  if (bytes <= 0) throw UsageError("size must be positive: '" + s + "'");
  return bytes;
}

std::array<index_t, 3> parse_dims(const std::string& s) {
  std::array<index_t, 3> d{1, 1, 1};
  std::stringstream ss(s);
  std::string tok;
  int i = 0;
  while (std::getline(ss, tok, ',')) {
    if (i >= 3) throw UsageError("--dims takes at most three extents");
    try {
      d[i++] = std::stoi(tok);
    } catch (const std::exception&) {
      throw UsageError("bad --dims component '" + tok + "'");
    }
  }
  if (i == 0) throw UsageError("--dims is empty");
  return d;
}

Executor executor_from_env() {
  const char* env = std::getenv("MPKFORGE_THREADS");
  if (!env || std::string(env) == "0") return Executor::Sequential;
  return Executor::Threaded;
}

void emit(const json& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << report.dump(2) << "\n";
  }
}

json manifest(const std::string& subcommand, const json& params,
              const std::vector<std::string>& input_files,
              std::uint64_t seed = 0) {
  json m;
  m["subcommand"] = subcommand;
  m["version"] = kVersion;
  m["params"] = params;
  m["seed"] = seed;
  json hashes = json::object();
  for (const auto& f : input_files) hashes[f] = hash_hex(fnv1a_file(f));
  m["input_hashes"] = hashes;
  return m;
}

json timing_block(double seconds) {
  json t;
  t["seconds"] = seconds;
  t["timestamp"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  return t;
}

Partition make_partition(const CrsMatrix& a, int n, const std::string& strategy,
                         const std::string& partfile) {
  if (strategy == "blockrows")
    return partition_rows(a, n, PartitionStrategy::BlockRows);
  if (strategy == "nnz")
    return partition_rows(a, n, PartitionStrategy::BalancedNnz);
  if (strategy == "file") {
    if (partfile.empty())
      throw UsageError("--strategy file requires --partfile");
    return read_partition_vector(partfile, n, a.n_rows);
  }
  throw UsageError("unknown strategy '" + strategy + "'");
}

std::vector<double> make_input_vector(const std::string& spec, index_t n,
                                      std::uint64_t* seed_out) {
  if (spec == "ones") return std::vector<double>(n, 1.0);
  if (spec.rfind("rand:", 0) == 0) {
    std::uint64_t seed;
    try {
      seed = std::stoull(spec.substr(5));
    } catch (const std::exception&) {
      throw UsageError("bad seed in '" + spec + "'");
    }
    if (seed_out) *seed_out = seed;
    Xoshiro256ss rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform_pm1();
    return x;
  }
  if (spec.rfind("file:", 0) == 0) {
    auto x = read_vector_file(spec.substr(5));
    if (static_cast<index_t>(x.size()) != n)
      throw std::runtime_error("input vector length " +
                               std::to_string(x.size()) + " != n_rows " +
                               std::to_string(n));
    return x;
  }
  throw UsageError("bad --x '" + spec + "' (use ones|rand:SEED|file:PATH)");
}

/// A^p x by repeated global SpMV; the per-row summation order matches
/// the distributed kernels, so agreement is bitwise.
std::vector<double> oracle_power(const CrsMatrix& a,
                                 const std::vector<double>& x, int p) {
  std::vector<double> v = x;
  for (int k = 0; k < p; ++k) v = spmv(a, v);
  return v;
}

struct RunOutcome {
  std::vector<std::vector<double>> powers;  // index p-1 holds A^p x
  RunCounters counters;
  double seconds = 0.0;
};

RunOutcome run_algo(const std::string& algo, const CrsMatrix& a,
                    const Partition& part, std::span<const RankPlan> plans,
                    const std::vector<double>& x, int p, std::int64_t cache,
                    Executor exec) {
  RunOutcome rc;
  const auto t0 = std::chrono::steady_clock::now();
  MpkRun<double> run;
  if (algo == "trad")
    run = trad_mpk<double>(plans, x, p, spmv_callback<double>(), exec);
  else if (algo == "dlb")
    run = dlb_mpk<double>(plans, x, p, spmv_callback<double>(), cache, exec);
  else if (algo == "ca")
    run = ca_mpk<double>(a, part, plans, x, p, spmv_callback<double>(), exec);
  else
    throw UsageError("unknown algo '" + algo + "'");
  rc.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t0)
                   .count();
  for (int q = 1; q <= p; ++q)
    rc.powers.push_back(gather_power<double>(plans, run.tables, q, a.n_rows));
  rc.counters = run.counters;
  return rc;
}

json counters_json(const RunCounters& c) {
  json j;
  j["owned_row_updates"] = c.owned_row_updates;
  j["redundant_row_updates"] = c.redundant_row_updates;
  j["exchanges"] = c.exchange.exchanges;
  j["exchanged_elements"] = c.exchange.elements;
  return j;
}

// ---- subcommand option bags -------------------------------------------

struct GenOpts {
  std::string kind, dims, out, disorder_out;
  double W = 0.0, t = 1.0, tperp = 1.0;
  std::uint64_t seed = 0;
};

struct RunOpts {
  std::string matrix, algo = "trad", x = "ones", verify, out, cache = "8MiB";
  int n = 1, p = 1, reps = 1;
};

struct SweepOpts {
  std::string matrix, algo = "dlb", cache = "8MiB", metric = "traffic", out;
  std::string p_range = "1..4";
  int n = 1;
};

struct ChebOpts {
  std::string dims, backend = "dlb", out_prefix, cache = "8MiB", k0;
  double W = 0.0, t = 1.0, tperp = 1.0, dt = 0.1, sigma = 1.0;
  std::uint64_t seed = 0;
  int order = 40, steps = 1, p = 4;
};

int cmd_gen(const GenOpts& o) {
  CrsMatrix a;
  json params{{"kind", o.kind}, {"dims", o.dims}, {"out", o.out}};
  std::vector<double> disorder;
  if (o.kind == "stencil5") {
    a = gen_stencil(parse_dims(o.dims), StencilKind::FivePoint);
  } else if (o.kind == "stencil7") {
    a = gen_stencil(parse_dims(o.dims), StencilKind::SevenPoint);
  } else if (o.kind == "anderson") {
    AndersonParams ap;
    ap.dims = parse_dims(o.dims);
    ap.W = o.W;
    ap.t = o.t;
    ap.t_perp = o.tperp;
    ap.seed = o.seed;
    a = gen_anderson(ap);
    disorder = std::move(ap.disorder);
    params["W"] = o.W;
    params["t"] = o.t;
    params["tperp"] = o.tperp;
  } else {
    throw UsageError("unknown kind '" + o.kind + "'");
  }
  write_matrix_market(a, o.out);
  if (!o.disorder_out.empty()) write_vector_file(disorder, o.disorder_out);
  const auto st = matrix_stats(a);
  json rep;
  rep["manifest"] = manifest("gen", params, {}, o.seed);
  rep["result"] = {{"n_rows", st.n_rows},
                   {"n_nz", st.n_nz},
                   {"nnzr", st.nnzr},
                   {"crs_bytes", st.crs_bytes},
                   {"output_hash", hash_hex(fnv1a_file(o.out))}};
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_stats(const std::string& matrix, bool as_json) {
  const auto a = read_matrix_market(matrix);
  const auto st = matrix_stats(a);
  if (as_json) {
    json rep;
    rep["manifest"] = manifest("stats", {{"matrix", matrix}}, {matrix});
    rep["result"] = {{"n_rows", st.n_rows},
                     {"n_nz", st.n_nz},
                     {"nnzr", st.nnzr},
                     {"crs_bytes", st.crs_bytes},
                     {"crs_mib", st.crs_mib}};
    std::cout << rep.dump(2) << "\n";
  } else {
    std::cout << "n_rows    " << st.n_rows << "\n"
              << "n_nz      " << st.n_nz << "\n"
              << "nnzr      " << st.nnzr << "\n"
              << "crs_bytes " << st.crs_bytes << "\n"
              << "crs_mib   " << st.crs_mib << "\n";
  }
  return 0;
}

int cmd_partition(const std::string& matrix, int n, const std::string& strategy,
                  const std::string& partfile, const std::string& out) {
  const auto a = read_matrix_market(matrix);
  const auto part = make_partition(a, n, strategy, partfile);
  write_partition_vector(part, out);
  json rep;
  std::vector<std::string> inputs{matrix};
  if (!partfile.empty()) inputs.push_back(partfile);
  rep["manifest"] = manifest(
      "partition",
      {{"matrix", matrix}, {"n", n}, {"strategy", strategy}, {"out", out}},
      inputs);
  json sizes = json::array();
  for (const auto& r : part.rows) sizes.push_back(r.size());
  rep["result"] = {{"rows_per_rank", sizes},
                   {"output_hash", hash_hex(fnv1a_file(out))}};
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_analyze(const std::string& matrix, int n, int p,
                const std::string& partfile, const std::string& cache) {
  const auto a = read_matrix_market(matrix);
  const auto part = make_partition(a, n, partfile.empty() ? "blockrows" : "file",
                                   partfile);
  const auto plans = build_all_plans(a, part, p);
  const auto oh = dlb_overheads(plans);
  const auto ca = ca_overheads(a, part, plans, p);

  json rep;
  std::vector<std::string> inputs{matrix};
  if (!partfile.empty()) inputs.push_back(partfile);
  rep["manifest"] =
      manifest("analyze",
               {{"matrix", matrix}, {"n", n}, {"p", p}, {"cache", cache}},
               inputs);
  json res;
  res["o_mpi"] = oh.o_mpi;
  res["o_dlb_global"] = oh.o_dlb_global;
  res["o_dlb_per_rank"] = oh.o_dlb_per_rank;
  res["n_halo_per_rank"] = oh.n_halo_per_rank;
  res["bulk_per_rank"] = oh.bulk_per_rank;
  res["ca"] = {{"additional_halo", ca.additional_halo},
               {"redundant_row_spmvs", ca.redundant_row_spmvs},
               {"redundant_nnz", ca.redundant_nnz},
               {"replicated_row_bytes", ca.replicated_row_bytes},
               {"e_sizes", ca.e_sizes}};
  json hist = json::array();
  for (const auto& pl : plans) {
    json levels = json::array();
    for (index_t l = 0; l < pl.levels.n_levels(); ++l)
      levels.push_back({{"size", pl.levels.level_size(l)},
                        {"bytes", pl.level_bytes[l]},
                        {"cap", pl.level_caps[l]}});
    hist.push_back({{"rank", pl.rank},
                    {"n_local", pl.n_local},
                    {"n_halo", pl.n_halo},
                    {"n_i_levels", pl.n_i_levels},
                    {"levels", levels}});
  }
  res["level_histogram"] = hist;
  if (!cache.empty()) {
    const std::int64_t c = parse_size(cache);
    json grouping = json::array();
    for (const auto& pl : plans) {
      const auto d = dlb_local_schedule(pl, c);
      grouping.push_back({{"rank", pl.rank},
                          {"n_groups", d.groups.n_groups()},
                          {"window_fits", d.groups.window_fits}});
    }
    res["grouping"] = grouping;
  }
  rep["result"] = res;
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_run(const RunOpts& o, bool bench) {
  const auto a = read_matrix_market(o.matrix);
  const auto part = make_partition(a, o.n, "blockrows", "");
  const auto plans = build_all_plans(a, part, o.p);
  std::uint64_t seed = 0;
  const auto x = make_input_vector(o.x, a.n_rows, &seed);
  const std::int64_t cache = parse_size(o.cache);
  const Executor exec = executor_from_env();

  std::string verify = o.verify;
  if (verify.empty() && a.n_rows <= 4096) verify = "oracle";

  RunOutcome rc;
  std::vector<double> samples;
  const int reps = bench ? o.reps : 1;
  for (int rep = 0; rep < reps; ++rep) {
    rc = run_algo(o.algo, a, part, plans, x, o.p, cache, exec);
    samples.push_back(rc.seconds);
  }

  bool ok = true;
  if (verify == "cross" || verify == "oracle") {
    for (const char* other : {"trad", "dlb", "ca"}) {
      if (other == o.algo) continue;
      const auto alt = run_algo(other, a, part, plans, x, o.p, cache, exec);
      for (int q = 0; q < o.p; ++q)
        if (alt.powers[q] != rc.powers[q]) ok = false;
    }
    if (verify == "oracle") {
      std::vector<double> v = x;
      for (int q = 0; q < o.p; ++q) {
        v = spmv(a, v);
        if (v != rc.powers[q]) ok = false;
      }
    }
  } else if (!verify.empty()) {
    throw UsageError("bad --verify '" + verify + "' (use oracle|cross)");
  }

  json rep;
  rep["manifest"] = manifest(
      bench ? "bench" : "run",
      {{"matrix", o.matrix}, {"n", o.n}, {"p", o.p}, {"algo", o.algo},
       {"cache", o.cache}, {"x", o.x}, {"verify", verify},
       {"reps", reps}},
      {o.matrix}, seed);
  json res = counters_json(rc.counters);
  res["n_rows"] = a.n_rows;
  res["n_nz"] = a.nnz();
  res["flops"] = flop_count(a.nnz(), o.p);
  res["verified"] = verify.empty() ? json(nullptr) : json(ok);
  {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (double v : rc.powers[o.p - 1]) {
      const auto* b = reinterpret_cast<const unsigned char*>(&v);
      for (std::size_t i = 0; i < sizeof v; ++i) {
        h ^= b[i];
        h *= 0x100000001b3ull;
      }
    }
    res["result_hash"] = hash_hex(h);
  }
  rep["result"] = res;
  json t = timing_block(rc.seconds);
  if (bench) {
    std::sort(samples.begin(), samples.end());
    t["samples"] = samples;
    t["median_seconds"] = samples[samples.size() / 2];
  }
  rep["timing"] = t;
  emit(rep, o.out);
  if (!ok) throw VerifyError("verification failed");
  return 0;
}

std::vector<int> parse_p_range(const std::string& s) {
  const auto dots = s.find("..");
  std::vector<int> ps;
  try {
    if (dots == std::string::npos) {
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) ps.push_back(std::stoi(tok));
    } else {
      const int lo = std::stoi(s.substr(0, dots));
      const int hi = std::stoi(s.substr(dots + 2));
      for (int p = lo; p <= hi; ++p) ps.push_back(p);
    }
  } catch (const std::exception&) {
    throw UsageError("bad -p range '" + s + "'");
  }
  if (ps.empty()) throw UsageError("empty -p range '" + s + "'");
  return ps;
}

json traffic_report(const CrsMatrix& a, const Partition& part, int p,
                    std::int64_t cache, const std::string& algo) {
  const auto plans = build_all_plans(a, part, p);
  std::int64_t miss = 0, matrix_bytes = 0, cache_traffic = 0;
  for (const auto& pl : plans) {
    const auto d = dlb_local_schedule(pl, cache);
    const auto order = algo == "trad"
                           ? trad_access_order(d.groups.n_groups(), p)
                           : schedule_access_order(d.schedule);
    const auto t = lru_traffic(order, d.groups.group_bytes, cache, p);
    miss += t.miss_bytes;
    matrix_bytes += t.matrix_bytes;
    cache_traffic += t.cache_bytes;
  }
  json res;
  res["miss_bytes"] = miss;
  res["matrix_bytes"] = matrix_bytes;
  res["blocking_factor"] =
      miss > 0 ? static_cast<double>(p) * matrix_bytes / miss : 0.0;
  return res;
}

int cmd_sweep(const SweepOpts& o) {
  const auto a = read_matrix_market(o.matrix);
  const auto part = make_partition(a, o.n, "blockrows", "");
  const auto ps = parse_p_range(o.p_range);
  std::vector<std::int64_t> caches;
  {
    std::stringstream ss(o.cache);
    std::string tok;
    while (std::getline(ss, tok, ',')) caches.push_back(parse_size(tok));
  }
  if (o.metric != "traffic" && o.metric != "gflops")
    throw UsageError("bad --metric '" + o.metric + "'");

  std::ostringstream csv;
  csv << "p,cache_bytes,";
  csv << (o.metric == "traffic" ? "miss_bytes,matrix_bytes,blocking_factor"
                                : "flops,seconds,gflops");
  csv << "\n";
  const Executor exec = executor_from_env();
  for (int p : ps)
    for (std::int64_t c : caches) {
      csv << p << "," << c << ",";
      if (o.metric == "traffic") {
        const auto t = traffic_report(a, part, p, c, o.algo);
        csv << t["miss_bytes"].get<std::int64_t>() << ","
            << t["matrix_bytes"].get<std::int64_t>() << ","
            << t["blocking_factor"].get<double>();
      } else {
        const auto plans = build_all_plans(a, part, p);
        const std::vector<double> x(a.n_rows, 1.0);
        const auto rc = run_algo(o.algo, a, part, plans, x, p, c, exec);
        const auto fl = flop_count(a.nnz(), p);
        csv << fl << "," << rc.seconds << "," << fl / rc.seconds / 1e9;
      }
      csv << "\n";
    }
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(o.out);
    if (!out) throw std::runtime_error("cannot open " + o.out);
    out << csv.str();
  }
  return 0;
}

int cmd_roofline(const std::string& matrix, double bs, double nnzr) {
  json params{{"bs", bs}};
  std::vector<std::string> inputs;
  if (!matrix.empty()) {
    const auto a = read_matrix_market(matrix);
    nnzr = matrix_stats(a).nnzr;
    params["matrix"] = matrix;
    inputs.push_back(matrix);
  }
  if (nnzr <= 0.0) throw UsageError("need --nnzr or -m");
  params["nnzr"] = nnzr;
  json rep;
  rep["manifest"] = manifest("roofline", params, inputs);
  rep["result"] = {{"nnzr", nnzr},
                   {"bytes_per_row", 6.0 + 14.0 / nnzr},
                   {"gflops", roofline_flops({bs, nnzr}) / 1e9}};
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_traffic(const std::string& matrix, int n, int p,
                const std::string& cache, const std::string& algo) {
  if (algo != "trad" && algo != "dlb")
    throw UsageError("traffic supports --algo trad|dlb");
  const auto a = read_matrix_market(matrix);
  const auto part = make_partition(a, n, "blockrows", "");
  json rep;
  rep["manifest"] = manifest("traffic",
                             {{"matrix", matrix}, {"n", n}, {"p", p},
                              {"cache", cache}, {"algo", algo}},
                             {matrix});
  rep["result"] = traffic_report(a, part, p, parse_size(cache), algo);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_cheb(const ChebOpts& o) {
  AndersonParams ap;
  ap.dims = parse_dims(o.dims);
  ap.W = o.W;
  ap.t = o.t;
  ap.t_perp = o.tperp;
  ap.seed = o.seed;
  const auto h = gen_anderson(ap);

  WavePacketParams wp;
  wp.sigma = o.sigma;
  for (int d = 0; d < 3; ++d) wp.center[d] = ap.dims[d] / 2;
  if (!o.k0.empty()) {
    std::stringstream ss(o.k0);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',') && i < 3) wp.k0[i++] = std::stod(tok);
  }
  const auto psi0 = wave_packet(ap.dims, wp);

  PropagationParams pp;
  pp.cheb_order = o.order;
  pp.dt = o.dt;
  pp.n_steps = o.steps;
  pp.backend = o.backend == "trad" ? ChebBackend::Trad : ChebBackend::Dlb;
  if (o.backend != "trad" && o.backend != "dlb")
    throw UsageError("bad --backend '" + o.backend + "'");
  pp.p_m = o.p;
  pp.cache_bytes = parse_size(o.cache);
  pp.exec = executor_from_env();

  std::ostringstream csv;
  csv << "step,time,norm,com_x,com_y,com_z\n";
  char line[160];
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = propagate(h, psi0, pp,
                             [&](int step, const std::vector<cplx>& psi) {
                               const auto ob =
                                   observables(psi, ap.dims, wp.center);
                               std::snprintf(
                                   line, sizeof line,
                                   "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                                   step + 1, (step + 1) * o.dt, ob.norm,
                                   ob.center_of_mass[0], ob.center_of_mass[1],
                                   ob.center_of_mass[2]);
                               csv << line;
                             });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  {
    std::ofstream out(o.out_prefix + ".csv");
    if (!out) throw std::runtime_error("cannot open " + o.out_prefix + ".csv");
    out << csv.str();
  }
  json rep;
  rep["manifest"] = manifest(
      "cheb",
      {{"dims", o.dims}, {"W", o.W}, {"t", o.t}, {"tperp", o.tperp},
       {"order", o.order}, {"dt", o.dt}, {"steps", o.steps},
       {"backend", o.backend}, {"p", o.p}, {"cache", o.cache},
       {"sigma", o.sigma}, {"k0", o.k0}},
      {}, o.seed);
  rep["result"] = counters_json(res.counters);
  rep["result"]["final_norm"] = res.norms.empty() ? 1.0 : res.norms.back();
  rep["timing"] = timing_block(secs);
  {
    std::ofstream out(o.out_prefix + ".json");
    if (!out) throw std::runtime_error("cannot open " + o.out_prefix + ".json");
    out << rep.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse matrix power kernel laboratory"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* sc_gen = app.add_subcommand("gen", "generate a matrix");
  sc_gen->add_option("--kind", gen.kind)->required();
  sc_gen->add_option("--dims", gen.dims)->required();
  sc_gen->add_option("--W", gen.W);
  sc_gen->add_option("--t", gen.t);
  sc_gen->add_option("--tperp", gen.tperp);
  sc_gen->add_option("--seed", gen.seed);
  sc_gen->add_option("-o,--output", gen.out)->required();
  sc_gen->add_option("--disorder-out", gen.disorder_out);

  std::string st_matrix;
  bool st_json = false;
  auto* sc_stats = app.add_subcommand("stats", "matrix statistics");
  sc_stats->add_option("-m,--matrix", st_matrix)->required();
  sc_stats->add_flag("--json", st_json);

  std::string pt_matrix, pt_strategy = "blockrows", pt_partfile, pt_out;
  int pt_n = 1;
  auto* sc_part = app.add_subcommand("partition", "write a partition vector");
  sc_part->add_option("-m,--matrix", pt_matrix)->required();
  sc_part->add_option("-n,--ranks", pt_n)->required();
  sc_part->add_option("--strategy", pt_strategy);
  sc_part->add_option("--partfile", pt_partfile);
  sc_part->add_option("-o,--output", pt_out)->required();

  std::string an_matrix, an_partfile, an_cache;
  int an_n = 1, an_p = 1;
  auto* sc_an = app.add_subcommand("analyze", "partition/plan overheads");
  sc_an->add_option("-m,--matrix", an_matrix)->required();
  sc_an->add_option("-n,--ranks", an_n)->required();
  sc_an->add_option("-p,--power", an_p)->required();
  sc_an->add_option("--partfile", an_partfile);
  sc_an->add_option("--cache", an_cache);

  RunOpts run;
  auto* sc_run = app.add_subcommand("run", "execute one MPK run");
  auto add_run_opts = [](CLI::App* sc, RunOpts& o) {
    sc->add_option("-m,--matrix", o.matrix)->required();
    sc->add_option("-n,--ranks", o.n)->required();
    sc->add_option("-p,--power", o.p)->required();
    sc->add_option("--algo", o.algo)->required();
    sc->add_option("--cache", o.cache);
    sc->add_option("--x", o.x);
    sc->add_option("--verify", o.verify);
    sc->add_option("-o,--output", o.out);
  };
  add_run_opts(sc_run, run);

  RunOpts bench;
  auto* sc_bench = app.add_subcommand("bench", "repeated timed runs");
  add_run_opts(sc_bench, bench);
  sc_bench->add_option("--reps", bench.reps)->required();

  SweepOpts sweep;
  auto* sc_sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
  sc_sweep->add_option("-m,--matrix", sweep.matrix)->required();
  sc_sweep->add_option("-n,--ranks", sweep.n)->required();
  sc_sweep->add_option("-p,--power", sweep.p_range)->required();
  sc_sweep->add_option("--algo", sweep.algo);
  sc_sweep->add_option("--cache", sweep.cache);
  sc_sweep->add_option("--metric", sweep.metric)->required();
  sc_sweep->add_option("-o,--output", sweep.out);

  std::string rf_matrix;
  double rf_bs = 0.0, rf_nnzr = 0.0;
  auto* sc_rf = app.add_subcommand("roofline", "bandwidth performance limit");
  sc_rf->add_option("--bs", rf_bs)->required();
  sc_rf->add_option("--nnzr", rf_nnzr);
  sc_rf->add_option("-m,--matrix", rf_matrix);

  std::string tf_matrix, tf_cache, tf_algo;
  int tf_n = 1, tf_p = 1;
  auto* sc_tf = app.add_subcommand("traffic", "LRU cache traffic model");
  sc_tf->add_option("-m,--matrix", tf_matrix)->required();
  sc_tf->add_option("-n,--ranks", tf_n)->required();
  sc_tf->add_option("-p,--power", tf_p)->required();
  sc_tf->add_option("--cache", tf_cache)->required();
  sc_tf->add_option("--algo", tf_algo)->required();

  ChebOpts cheb;
  auto* sc_cheb = app.add_subcommand("cheb", "Chebyshev time propagation");
  sc_cheb->add_option("--dims", cheb.dims)->required();
  sc_cheb->add_option("--W", cheb.W);
  sc_cheb->add_option("--t", cheb.t);
  sc_cheb->add_option("--tperp", cheb.tperp);
  sc_cheb->add_option("--seed", cheb.seed);
  sc_cheb->add_option("--order", cheb.order)->required();
  sc_cheb->add_option("--dt", cheb.dt)->required();
  sc_cheb->add_option("--steps", cheb.steps)->required();
  sc_cheb->add_option("--backend", cheb.backend)->required();
  sc_cheb->add_option("-p,--power", cheb.p)->required();
  sc_cheb->add_option("--cache", cheb.cache)->required();
  sc_cheb->add_option("--sigma", cheb.sigma);
  sc_cheb->add_option("--k0", cheb.k0);
  sc_cheb->add_option("-o,--output", cheb.out_prefix)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*sc_gen) return cmd_gen(gen);
    if (*sc_stats) return cmd_stats(st_matrix, st_json);
    if (*sc_part)
      return cmd_partition(pt_matrix, pt_n, pt_strategy, pt_partfile, pt_out);
    if (*sc_an) return cmd_analyze(an_matrix, an_n, an_p, an_partfile, an_cache);
    if (*sc_run) return cmd_run(run, false);
    if (*sc_bench) return cmd_run(bench, true);
    if (*sc_sweep) return cmd_sweep(sweep);
    if (*sc_rf) return cmd_roofline(rf_matrix, rf_bs, rf_nnzr);
    if (*sc_tf) return cmd_traffic(tf_matrix, tf_n, tf_p, tf_cache, tf_algo);
    if (*sc_cheb) return cmd_cheb(cheb);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const VerifyError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
