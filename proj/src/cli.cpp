#include "cli.hpp"

#include "CLI11.hpp"

namespace gapcert::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gapcert: spectral-gap experiments and instance certificates on regular graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::string json_path;  // where to write the report; stdout when empty
  app.add_option("--json-out", json_path, "write the JSON report to this path instead of stdout");
  int jobs = 1;
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "sample uniform simple d-regular graphs");
  c_gen->add_option("--n", gen.n)->required();
  c_gen->add_option("--d", gen.d)->required();
  c_gen->add_option("--seed", gen.seed);
  c_gen->add_option("--count", gen.count)->check(CLI::NonNegativeNumber);
  c_gen->add_option("--out", gen.out)->required();
  c_gen->add_option("--base", gen.base)->check(CLI::IsMember({0, 1}));

  SpectraArgs spe;
  bool no_cheeger = false;
  auto* c_spe = app.add_subcommand("spectra", "eigenvalues, Cheeger constant, Friedman gate");
  c_spe->add_option("--in", spe.in)->required();
  c_spe->add_option("--base", spe.base)->check(CLI::IsMember({0, 1}));
  c_spe->add_flag("--no-cheeger", no_cheeger);
  c_spe->add_flag("--json", "accepted for symmetry; output is always JSON");

  ExpanArgs exa;
  auto* c_exa = app.add_subcommand("expan", "check long-range expansion parts A and B");
  c_exa->add_option("--in", exa.in)->required();
  c_exa->add_option("--alpha-log", exa.alpha, "ln alpha, or 'paper'");
  c_exa->add_option("--eps", exa.eps);
  c_exa->add_option("--L", exa.L, "L, or 'paper' for 24/alpha");
  c_exa->add_option("--mode", exa.mode)->check(CLI::IsMember({"exact", "sampled", "sufficient"}));
  c_exa->add_option("--part", exa.part)->check(CLI::IsMember({"A", "B", "both"}));
  c_exa->add_option("--trials", exa.trials);
  c_exa->add_option("--seed", exa.seed);
  c_exa->add_option("--base", exa.base)->check(CLI::IsMember({0, 1}));
  c_exa->add_flag("--json", "accepted for symmetry; output is always JSON");

  GammaArgs gam;
  auto* c_gam = app.add_subcommand("gamma", "search for large Poincare ratios (lower bound on gamma)");
  c_gam->add_option("--in", gam.in)->required();
  c_gam->add_option("--norm", gam.norm, "norm JSON; default Euclidean");
  c_gam->add_option("--p", gam.p);
  c_gam->add_option("--k", gam.k);
  c_gam->add_option("--budget", gam.budget);
  c_gam->add_option("--restarts", gam.restarts);
  c_gam->add_option("--seed", gam.seed);
  c_gam->add_option("--base", gam.base)->check(CLI::IsMember({0, 1}));
  c_gam->add_flag("--json", "accepted for symmetry; output is always JSON");

  CertifyArgs cer;
  auto* c_cer = app.add_subcommand("certify", "replay the certificate pipeline on a graph and a field");
  c_cer->add_option("--in", cer.in)->required();
  c_cer->add_option("--f", cer.field, "field CSV, n rows by k columns")->required();
  c_cer->add_option("--norm", cer.norm);
  c_cer->add_option("--q", cer.q);
  c_cer->add_option("--C", cer.C);
  c_cer->add_option("--alpha-mode", cer.alpha_mode)->check(CLI::IsMember({"paper", "fitted", "both"}));
  c_cer->add_option("--p", cer.p);
  c_cer->add_option("--json", cer.json_out, "report path");
  c_cer->add_flag("--force-selection", cer.force_selection, "run greedy selection at every scale");
  c_cer->add_option("--base", cer.base)->check(CLI::IsMember({0, 1}));

  CotypeArgs cot;
  double cot_C = 0.0;
  auto* c_cot = app.add_subcommand("cotype", "cotype constant of a vector family");
  c_cot->add_option("--norm", cot.norm);
  c_cot->add_option("--vectors", cot.vectors)->required();
  c_cot->add_option("--q", cot.q);
  auto* opt_C = c_cot->add_option("--C", cot_C, "also check restricted cotype with this constant");
  c_cot->add_option("--trials", cot.trials);
  c_cot->add_option("--seed", cot.seed);

  ConstantsArgs con;
  auto* c_con = app.add_subcommand("constants", "evaluate named constants in log space");
  c_con->add_option("--id", con.id);
  c_con->add_option("--q", con.q);
  c_con->add_option("--C", con.C);
  c_con->add_option("--K", con.K);
  c_con->add_option("--d", con.d);
  c_con->add_option("--alpha", con.alpha, "ln alpha, or 'paper'");
  c_con->add_option("--eps", con.eps);
  c_con->add_option("--L", con.L, "L, or 'paper'");
  c_con->add_option("--i", con.i);
  c_con->add_option("--lambda2", con.lambda2);
  c_con->add_option("--baseline", con.baseline, "comma-separated q grid");
  c_con->add_flag("--identities", con.identities);
  c_con->add_flag("--json", "accepted for symmetry; output is always JSON");

  UcSweepArgs ucs;
  auto* c_ucs = app.add_subcommand("uc-sweep", "average distance and embedding lower bounds over n");
  c_ucs->add_option("--d", ucs.d);
  c_ucs->add_option("--n", ucs.n_list, "comma-separated sizes")->required();
  c_ucs->add_option("--samples", ucs.samples);
  c_ucs->add_option("--q", ucs.q_list);
  c_ucs->add_option("--seed", ucs.seed);
  c_ucs->add_option("--C", ucs.C);
  c_ucs->add_option("--K", ucs.K);
  c_ucs->add_option("--distortion", ucs.distortion);
  c_ucs->add_option("--csv", ucs.csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  gen.jobs = ucs.jobs = jobs;
  spe.cheeger = !no_cheeger;
  if (opt_C->count()) cot.C = cot_C;

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  try {
    if (name == "gen") rep = run_gen(gen);
    else if (name == "spectra") rep = run_spectra(spe);
    else if (name == "expan") rep = run_expan(exa);
    else if (name == "gamma") rep = run_gamma(gam);
    else if (name == "certify") rep = run_certify(cer);
    else if (name == "cotype") rep = run_cotype(cot);
    else if (name == "constants") rep = run_constants(con);
    else rep = run_uc_sweep(ucs);
  } catch (const ParseError& e) {
    err << "gapcert " << name << ": parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const ResourceError& e) {
    err << "gapcert " << name << ": resource limit: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "gapcert " << name << ": precondition failed: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "gapcert " << name << ": " << e.what() << "\n";
    return kUsage;
  }
  rep.spec["jobs"] = jobs;
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const std::string text = format_report(rep, name);
  std::string path = json_path;
  if (name == "certify" && !cer.json_out.empty()) path = cer.json_out;
  if (name == "gen") write_file((std::filesystem::path(gen.out) / "manifest.json").string(), text);
  try {
    if (path.empty() || path == "-") out << text;
    else write_file(path, text);
  } catch (const std::exception& e) {
    err << "gapcert: " << e.what() << "\n";
    return kUsage;
  }
  return rep.exit_code;
}

}  // namespace gapcert::cli
