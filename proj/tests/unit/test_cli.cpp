#include "lattice/cli.hpp"
#include "lattice/io.hpp"

#include "../support/files.hpp"
#include "../support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

using namespace lattice;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fixtures::scratch_dir("lattice_cli");
    fixtures::write_lattice_files(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, ValidateExitCodes) {
  EXPECT_EQ(run({"validate", file("sc.json")}).code, 0);
  const CliRun b = run({"validate", "--in", file("isolated_node.json")});
  EXPECT_EQ(b.code, 1);
  EXPECT_NE(b.out.find("IsolatedNode nodes=5"), std::string::npos) << b.out;
  EXPECT_NE(b.out.find("violations=1"), std::string::npos);
  const CliRun e = run({"validate", file("not_periodic.json")});
  EXPECT_EQ(e.code, 1);
  EXPECT_NE(e.out.find("periodic_dimension=0"), std::string::npos);

  io::write_text(dir / "broken.json", "{ \"nodes\": [ }");
  const CliRun bad = run({"validate", file("broken.json")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 1"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"validate", file("missing.json")}).code, 2);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"encode"}).code, 2);
  EXPECT_EQ(run({"validate", file("sc.json"), "--chirality", "sideways"}).code, 2);
  EXPECT_EQ(run({"compare", file("sc.json")}).code, 2);
  EXPECT_EQ(run({"tessellate", file("sc.json"), "--dims", "2x2"}).code, 2);
  EXPECT_EQ(run({"validate", file("sc.json"), "--tol-pos", "-1"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, EncodeReconstructRoundTrip) {
  ASSERT_EQ(run({"encode", file("fcc.json"), "--out", file("fcc.desc.json")}).code, 0);
  const io::DescriptorFile d = io::load_descriptors(dir / "fcc.desc.json");
  EXPECT_EQ(d.descriptors.size(), 14u);
  EXPECT_EQ(d.fingerprint.size(), 64u);
  ASSERT_EQ(run({"reconstruct", file("fcc.desc.json"), "--out", file("fcc.back.json")}).code, 0);
  const CliRun cmp = run({"compare", file("fcc.json"), file("fcc.back.json")});
  EXPECT_EQ(cmp.code, 0);
  EXPECT_EQ(cmp.out, "equivalent\n");
  const CliRun fp = run({"fingerprint", file("fcc.back.json")});
  EXPECT_EQ(fp.out, d.fingerprint + "\n");
}

TEST_F(Cli, ReconstructDemandsCanonicalLabels) {
  ASSERT_EQ(run({"encode", file("bcc.json"), "--out", file("bcc.desc.json")}).code, 0);
  EXPECT_EQ(run({"reconstruct", file("bcc.desc.json")}).code, 1);
  EXPECT_EQ(run({"reconstruct", file("bcc.desc.json"), "--any-labels"}).code, 0);
  ASSERT_EQ(run({"canonicalize", file("bcc.desc.json"), "--out", file("bcc.canon.json")}).code, 0);
  EXPECT_EQ(run({"reconstruct", file("bcc.canon.json")}).code, 0);
}

TEST_F(Cli, CompareRelabeledAndDistinct) {
  io::LatticeFile f;
  f.cell = fixtures::relabeled(fixtures::sc(), {5, 3, 8, 1, 2, 7, 4, 6});
  io::save(dir / "sc_relabels.json", f);
  const CliRun same = run({"compare", file("sc.json"), file("sc_relabels.json")});
  EXPECT_EQ(same.code, 0);
  EXPECT_EQ(same.out, "equivalent\n");
  const CliRun diff = run({"compare", file("sc.json"), file("bcc.json")});
  EXPECT_EQ(diff.code, 1);
  EXPECT_EQ(diff.out, "distinct\n");
  EXPECT_EQ(run({"compare", file("sc.json"), file("isolated_node.json")}).code, 1);
}

TEST_F(Cli, Properties) {
  const CliRun r = run({"properties", file("sc.json"), "--out", file("coef.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("s=8\ne=12\nZ=3\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("rho_bar="), std::string::npos);
  EXPECT_NE(io::read_text(dir / "coef.json").find("omega"), std::string::npos);
  const CliRun p = run({"properties", file("pyramid.json")});
  EXPECT_EQ(p.code, 0);
  EXPECT_NE(p.out.find("rho=n/a"), std::string::npos);
}

TEST_F(Cli, TessellateAndExport) {
  const CliRun t = run({"tessellate", file("sc.json"), "--dims", "2x2x2", "--out", file("sc222.json")});
  EXPECT_EQ(t.code, 0);
  EXPECT_EQ(t.out, "s=27 e=54 Z=4\n");
  EXPECT_EQ(io::load_lattice(dir / "sc222.json").cell.size(), 27u);
  EXPECT_EQ(run({"tessellate", file("pyramid.json"), "--dims", "1x1x2"}).code, 1);
  const CliRun obj = run({"export", file("sc.json")});
  EXPECT_EQ(obj.code, 0);
  EXPECT_NE(obj.out.find("\nv 0 0 0\n"), std::string::npos) << obj.out;
  EXPECT_NE(run({"export", file("sc.json"), "--format", "csv"}).out.find("# P\n"), std::string::npos);
}

TEST_F(Cli, StiffnessSolve) {
  const CliRun r = run({"stiffness", file("sc.json"), "--m", "2", "--fix", "1", "--load", "8:uz:-1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"displacements\""), std::string::npos);
  EXPECT_EQ(run({"stiffness", file("sc.json"), "--fix", "1", "--load", "8:qq:1"}).code, 2);
  // Three orthogonal struts per node hold every rotation even without torsion.
  const CliRun off = run({"stiffness", file("sc.json"), "--torsion", "off", "--fix", "1", "--load", "8:uz:1"});
  EXPECT_EQ(off.code, 0);
  EXPECT_NE(off.out.find("\"torsion_singular\": true"), std::string::npos);
}

TEST_F(Cli, BatchDirectory) {
  const fs::path out = dir / "reports";
  const CliRun r = run({"validate", dir.string(), "--out", out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(fs::exists(out / "sc.txt"));
  EXPECT_TRUE(fs::exists(out / "isolated_strut.txt"));
  const CliRun fp = run({"fingerprint", dir.string()});
  EXPECT_NE(fp.out.find("sc.json: "), std::string::npos);
  EXPECT_NE(fp.err.find("repeated_nodes.json: "), std::string::npos);
}

TEST_F(Cli, ToleranceFromEnvironment) {
  ::setenv("LATTICE_CODEC_TOL_POS", "junk", 1);
  EXPECT_EQ(run({"validate", file("sc.json")}).code, 2);
  ::setenv("LATTICE_CODEC_TOL_POS", "1e-6", 1);
  EXPECT_EQ(run({"validate", file("sc.json")}).code, 0);
  ::unsetenv("LATTICE_CODEC_TOL_POS");
}
