// Command-line driver: convergence studies, invariant check suites, and mesh
// utilities over the plain-text mesh format.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rhdg/mesh.hpp"
#include "rhdg/study.hpp"

namespace {

void write_output(const std::string& text, const std::string& outfile) {
  if (outfile.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(outfile, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + outfile + "'");
  out << text;
}

rhdg::Mesh load_mesh(const std::string& infile) {
  std::ifstream in(infile, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mesh file '" + infile + "'");
  return rhdg::read_mesh(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybridized DG Poisson solver with reduced stabilization"};
  app.require_subcommand(1);

  // --- study ---------------------------------------------------------------
  rhdg::StudyConfig study;
  std::string scheme_name = "reduced";
  std::string hybrid_name = "disc";
  std::string out_format = "csv";
  std::string outfile;

  CLI::App* cmd_study = app.add_subcommand("study", "convergence study on refined meshes");
  cmd_study->add_option("--k", study.ks, "element degrees, e.g. --k 1,2,3")
      ->delimiter(',');
  cmd_study->add_option("--scheme", scheme_name, "reduced|standard")
      ->check(CLI::IsMember({"reduced", "standard"}));
  cmd_study->add_option("--hybrid", hybrid_name, "disc|cont trace continuity")
      ->check(CLI::IsMember({"disc", "cont"}));
  cmd_study->add_option("--s", study.s, "adjoint-term coefficient (1, -1, 0, ...)");
  cmd_study->add_option("--tau0", study.tau0, "stabilization scale; default 10 k^2");
  cmd_study->add_option("--levels", study.levels, "refinement levels")->check(CLI::Range(2, 8));
  cmd_study->add_option("--base-n", study.base_n, "cells per side of the level-1 mesh");
  cmd_study->add_option("--perturb", study.perturb, "interior-node jitter fraction");
  cmd_study->add_option("--seed", study.seed, "jitter seed");
  cmd_study->add_option("--problem", study.problem, "sinsin|poly-patch|linear");
  cmd_study->add_option("--out", out_format, "csv|md")->check(CLI::IsMember({"csv", "md"}));
  cmd_study->add_option("--outfile", outfile, "write the table here instead of stdout");

  // --- check ---------------------------------------------------------------
  std::string suite;
  CLI::App* cmd_check = app.add_subcommand("check", "run a named invariant suite");
  cmd_check
      ->add_option("--suite", suite,
                   "quadrature-identity|conservation|cr-equivalence|symmetry|"
                   "coercivity-s-neg|patch-exactness")
      ->required();

  // --- mesh ----------------------------------------------------------------
  CLI::App* cmd_mesh = app.add_subcommand("mesh", "mesh utilities");
  cmd_mesh->require_subcommand(1);

  int gen_n = 14;
  double gen_perturb = 0.0;
  std::uint64_t gen_seed = 42;
  std::string mesh_in, mesh_out;
  CLI::App* cmd_gen = cmd_mesh->add_subcommand("gen", "perturbed criss-cross unit square");
  cmd_gen->add_option("--n", gen_n, "cells per side")->required();
  cmd_gen->add_option("--perturb", gen_perturb, "interior-node jitter fraction");
  cmd_gen->add_option("--seed", gen_seed, "jitter seed");
  cmd_gen->add_option("--outfile", mesh_out, "output mesh file (default stdout)");

  CLI::App* cmd_refine = cmd_mesh->add_subcommand("refine", "uniform red refinement");
  cmd_refine->add_option("--infile", mesh_in, "input mesh file")->required();
  cmd_refine->add_option("--outfile", mesh_out, "output mesh file (default stdout)");

  CLI::App* cmd_quality = cmd_mesh->add_subcommand("quality", "shape-quality report");
  cmd_quality->add_option("--infile", mesh_in, "input mesh file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_study) {
      study.scheme = scheme_name == "standard" ? rhdg::Scheme::standard
                                               : rhdg::Scheme::reduced;
      study.hybrid = hybrid_name == "cont" ? rhdg::TraceContinuity::continuous
                                           : rhdg::TraceContinuity::discontinuous;
      const std::vector<rhdg::StudyRow> rows = rhdg::run_study(study);
      write_output(out_format == "md" ? rhdg::to_markdown(rows) : rhdg::to_csv(rows),
                   outfile);
    } else if (*cmd_check) {
      const std::vector<rhdg::CheckResult> results = rhdg::run_checks(suite);
      bool all_pass = true;
      for (const rhdg::CheckResult& r : results) {
        all_pass = all_pass && r.pass;
        std::printf("%s %s measured=%.3e threshold=%.3e (%s)\n",
                    r.pass ? "[PASS]" : "[FAIL]", r.name.c_str(), r.measured,
                    r.threshold, r.detail.c_str());
      }
      return all_pass ? 0 : 1;
    } else if (*cmd_gen) {
      write_output(rhdg::write_mesh(rhdg::generate_unit_square(gen_n, gen_perturb, gen_seed)),
                   mesh_out);
    } else if (*cmd_refine) {
      write_output(rhdg::write_mesh(rhdg::refine_uniform(load_mesh(mesh_in))), mesh_out);
    } else if (*cmd_quality) {
      const rhdg::Mesh mesh = load_mesh(mesh_in);
      const rhdg::MeshQualityReport report = rhdg::quality_report(mesh);
      int worst = 0;
      for (int t = 1; t < mesh.num_triangles(); ++t)
        if (report.ratio[t] > report.ratio[worst]) worst = t;
      std::printf("nodes %d  triangles %d  edges %d (boundary %d)\n", mesh.num_nodes(),
                  mesh.num_triangles(), mesh.num_edges(), mesh.num_boundary_edges());
      std::printf("h = %.6e  max h_K/rho_K = %.6f (triangle %d)\n", report.max_diameter,
                  report.max_ratio, worst);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
