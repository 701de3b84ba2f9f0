#include "steinlab/csv_io.hpp"
#include "steinlab/experiments.hpp"
#include "steinlab/oracle_suites.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace steinlab;

TEST(Csv, RoundTripWithinTolerance) {
  Rng rng(1);
  PointSet p = sample_standard_gaussian(3, 200, rng);
  p(0, 0) = 1e-300;
  p(1, 1) = -123456789.123456789;
  p(2, 2) = 0.1;
  std::ostringstream out;
  write_csv(out, p, {"x0", "x1", "x2"});
  const PointSet q = parse_csv(out.str());
  ASSERT_EQ(q.rows(), 200);
  ASSERT_EQ(q.cols(), 3);
  EXPECT_LE((p - q).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(p, q);  // shortest round-trip formatting is exact
}

TEST(Csv, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "steinlab_csv_roundtrip.csv";
  Rng rng(2);
  const PointSet p = sample_uniform_sphere(3, 20, rng);
  write_csv(path.string(), p);
  EXPECT_EQ(read_csv(path.string()), p);
  std::filesystem::remove(path);
  EXPECT_THROW(read_csv(path.string()), std::runtime_error);
}

TEST(Csv, ParsingRules) {
  const PointSet p = parse_csv("# comment\na,b\n\n1.5, -2\n+3,4e-3\r\n");
  ASSERT_EQ(p.rows(), 2);
  EXPECT_EQ(p(0, 0), 1.5);
  EXPECT_EQ(p(0, 1), -2.0);
  EXPECT_EQ(p(1, 0), 3.0);
  EXPECT_EQ(p(1, 1), 4e-3);
  EXPECT_EQ(parse_csv("0.25\n").rows(), 1);
}

TEST(Csv, Errors) {
  EXPECT_THROW(parse_csv(""), std::runtime_error);
  EXPECT_THROW(parse_csv("x,y\n"), std::runtime_error);
  EXPECT_THROW(parse_csv("1,2\n3\n"), std::runtime_error);
  EXPECT_THROW(parse_csv("1,2\n3,abc\n"), std::runtime_error);
  EXPECT_THROW(parse_csv("1,2\n3,\n"), std::runtime_error);
  EXPECT_THROW(parse_csv("1;2\n"), std::runtime_error);
}

TEST(Csv, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(TestVariant, ParseAndName) {
  for (const std::string name : {"KSD", "KSD(Tikhonov)", "KSD(TikMax)", "KSD(TikMax)*", "KSD(SpectralCutoff)",
                                 "KSD(Tikhonov)[lambda=0.1]"})
    EXPECT_EQ(parse_test_variant(name).name(), name);
  const auto v = parse_test_variant("KSD(TikMax)[lambda=0.0031622776601683794]");
  EXPECT_EQ(v.kind, TestVariant::Kind::SingleLambda);
  EXPECT_EQ(v.regularizer.family, RegularizerFamily::TikMax);
  EXPECT_EQ(v.lambda, 0.0031622776601683794);
  for (const std::string bad : {"MMD", "KSD(Landweber)", "KSD(Tikhonov)+", "KSD(Tikhonov)[lambda=-1]",
                                "KSD(Tikhonov)[lambda=x]", "KSD(Tikhonov"})
    EXPECT_THROW(parse_test_variant(bad), std::invalid_argument) << bad;
}

TEST(Experiments, DefaultsAndPaperScale) {
  auto rbm = default_experiment(ModelFamily::Rbm);
  EXPECT_EQ(rbm.dim, 10);
  EXPECT_EQ(rbm.hidden_dim, 8);
  EXPECT_EQ(rbm.n, 300);
  apply_paper_scale(rbm);
  EXPECT_EQ(rbm.dim, 50);
  EXPECT_EQ(rbm.hidden_dim, 40);
  EXPECT_EQ(rbm.n, 1000);
  EXPECT_EQ(rbm.repetitions, 500);
  const auto w = default_experiment(ModelFamily::Watson);
  EXPECT_EQ(w.n, 500);
  EXPECT_EQ(*w.n2, 100);
  EXPECT_EQ(w.params, (std::vector<double>{0, 1, 2, 4}));
  EXPECT_NO_THROW(w.validate());
  for (auto f : {ModelFamily::Gaussian, ModelFamily::Rbm, ModelFamily::Watson, ModelFamily::Fourier}) {
    EXPECT_EQ(model_from_name(to_string(f)), f);
    EXPECT_NO_THROW(default_experiment(f).validate());
  }
  EXPECT_THROW(model_from_name("brownian"), std::invalid_argument);
}

TEST(Experiments, Validation) {
  auto c = default_experiment(ModelFamily::Gaussian);
  c.repetitions = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = default_experiment(ModelFamily::Watson);
  c.dim = 4;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = default_experiment(ModelFamily::Gaussian);
  c.tests = {"MMD"};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = default_experiment(ModelFamily::Gaussian);
  c.base_kernel = "laplace";
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = default_experiment(ModelFamily::Gaussian);
  c.params = {};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Experiments, DatasetsUseCommonRandomNumbers) {
  auto c = default_experiment(ModelFamily::Gaussian);
  c.seed = 5;
  const Dataset a = draw_dataset(c, 0, 3), b = draw_dataset(c, 2, 3), other = draw_dataset(c, 0, 4);
  ASSERT_EQ(a.data.rows(), 200);
  EXPECT_EQ(a.null_samples.rows(), 40);
  EXPECT_NEAR((b.data.col(0).array() - a.data.col(0).array() - 0.5).abs().maxCoeff(), 0.0, 1e-14);
  EXPECT_EQ(b.data.col(1), a.data.col(1));
  EXPECT_NE(other.data, a.data);
}

TEST(Experiments, DatasetShapesPerFamily) {
  for (auto f : {ModelFamily::Rbm, ModelFamily::Watson, ModelFamily::Fourier}) {
    auto c = default_experiment(f);
    c.n = 50;
    c.n2 = 10;
    const Dataset ds = draw_dataset(c, c.params.size() - 1, 0);
    EXPECT_EQ(ds.data.rows(), 50);
    EXPECT_EQ(ds.data.cols(), c.dim);
    EXPECT_EQ(ds.null_samples.rows(), 10);
    EXPECT_EQ(stein_dim(ds.kernel), c.dim);
  }
}

TEST(Experiments, SingleRepetitionPowerIsZeroOrOne) {
  auto c = default_experiment(ModelFamily::Gaussian);
  c.repetitions = 1;
  c.n = 60;
  c.test.bootstrap = 100;
  c.tests = {"KSD", "KSD(Tikhonov)", "KSD(TikMax)*", "KSD(Tikhonov)[lambda=0.1]"};
  const auto rows = run_power(c);
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.power == 0.0 || r.power == 1.0);
    EXPECT_EQ(r.reps, 1);
    EXPECT_EQ(r.se, 0.0);
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool ordered = rows[i - 1].test < rows[i].test ||
                         (rows[i - 1].test == rows[i].test && rows[i - 1].param < rows[i].param);
    EXPECT_TRUE(ordered);
  }
}

TEST(Experiments, ResultsIndependentOfThreadCount) {
  auto c = default_experiment(ModelFamily::Fourier);
  c.repetitions = 6;
  c.n = 80;
  c.test.bootstrap = 100;
  c.threads = 1;
  const auto a = run_power(c);
  c.threads = 3;
  const auto b = run_power(c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].test, b[i].test);
    EXPECT_EQ(a[i].param, b[i].param);
    EXPECT_EQ(a[i].rejections, b[i].rejections);
    EXPECT_NEAR(a[i].se, std::sqrt(a[i].power * (1 - a[i].power) / a[i].reps), 1e-15);
  }
}

TEST(Experiments, CalibrationRunsNullOnly) {
  auto c = default_experiment(ModelFamily::Gaussian);
  c.repetitions = 2;
  c.n = 40;
  c.test.bootstrap = 50;
  const auto rows = run_calibration(c);
  ASSERT_EQ(rows.size(), c.tests.size());
  for (const auto& r : rows) EXPECT_EQ(r.param, 0.0);
}

TEST(Experiments, VariantDispatch) {
  auto c = default_experiment(ModelFamily::Gaussian);
  c.n = 60;
  const Dataset ds = draw_dataset(c, 0, 0);
  TestConfig base = c.test;
  base.bootstrap = 50;
  EXPECT_EQ(run_variant(parse_test_variant("KSD"), ds, base, 1).cells.size(), 1u);
  EXPECT_EQ(run_variant(parse_test_variant("KSD(Tikhonov)"), ds, base, 1).cells.size(), 24u);
  const auto nc = run_variant(parse_test_variant("KSD(Tikhonov)*"), ds, base, 1);
  EXPECT_EQ(nc.n1, 60);
  EXPECT_EQ(nc.n2, 12);
  const auto s = run_variant(parse_test_variant("KSD(TikMax)[lambda=0.1]"), ds, base, 1);
  ASSERT_EQ(s.cells.size(), 1u);
  EXPECT_EQ(s.cells[0].lambda, 0.1);
  EXPECT_EQ(s.level_per_cell, 0.05);
}

TEST(OracleSuites, SelectorHandling) {
  const auto& names = oracle_suite_names();
  EXPECT_EQ(names.size(), 6u);
  EXPECT_THROW(run_oracle_suites("no_such_suite"), std::invalid_argument);
  EXPECT_THROW(run_oracle_suite("no_such_suite"), std::invalid_argument);
  const auto r = run_oracle_suites("mehler,tikhonov_path");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].name, "mehler");
  EXPECT_TRUE(r[0].passed);
  EXPECT_TRUE(r[1].passed);
  EXPECT_FALSE(r[1].details.empty());
}
