#include <rewl1/config.hpp>
#include <rewl1/io.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>

using namespace rewl1;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "rewl1_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::invalid_argument;
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(-2.5e-7), "-2.5e-07");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  for (double v : {1.0 / 3.0, 6.02214076e23, 5e-324, 0.30000000000000004})
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
}

TEST(MatrixFile, RoundTripAndHeader) {
  Matrix a(3, 2);
  a << 1, -2, 3.25, 1e-300, -0.0, 7;
  const auto p = scratch("a.f64");
  write_matrix(p, a);
  EXPECT_EQ(std::filesystem::file_size(p), 8u + 4 + 4 + 8 + 8 + 6 * 8);
  EXPECT_EQ(read_matrix(p), a);
  std::ifstream is(p, std::ios::binary);
  char magic[8];
  is.read(magic, 8);
  EXPECT_EQ(std::string(magic, 7), "RWL1F64");
  const Vector v = Eigen::Vector3d(1, 2, 3);
  write_vector(scratch("v.f64"), v);
  EXPECT_EQ(read_vector(scratch("v.f64")), v);
  EXPECT_THROW(read_vector(p), Error);
}

TEST(MatrixFile, RejectsGarbage) {
  const auto p = scratch("bad.f64");
  std::ofstream(p) << "not a matrix";
  EXPECT_THROW(read_matrix(p), Error);
  EXPECT_THROW(read_matrix(scratch("missing.f64")), Error);
}

TEST(Pgm, RoundTripWithin16BitQuantization) {
  Matrix img(4, 5);
  for (Index i = 0; i < img.size(); ++i) img.data()[i] = static_cast<double>(i) / 19.0;
  img(0, 0) = 1.5;  // clipped
  const auto p = scratch("img.pgm");
  write_pgm(p, img);
  Matrix back = read_pgm(p);
  ASSERT_EQ(back.rows(), 4);
  ASSERT_EQ(back.cols(), 5);
  EXPECT_EQ(back(0, 0), 1.0);
  back(0, 0) = img(0, 0) = 1.0;
  EXPECT_LE((back - img).lpNorm<Eigen::Infinity>(), 0.5 / 65535 + 1e-12);
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config("# phase transition\nexperiment = phase-transition\nk_values = 10, 20\ntrials=3\n");
  EXPECT_EQ(c.experiment, ExperimentKind::phase_transition);
  EXPECT_EQ(c.n, 256);
  EXPECT_EQ(c.m, 100);
  EXPECT_EQ(c.k_values, (std::vector<Index>{10, 20}));
  EXPECT_EQ(c.trials, 3);
  EXPECT_EQ(c.eps_values.size(), 5u);
}

TEST(Config, Errors) {
  EXPECT_EQ(code_of([] { parse_config("n=5\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_config("experiment=noisy\nbogus=1\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_config("experiment=noisy\ntrials=1\ntrials=2\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_config("experiment=noisy\ntrials=0\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_config("experiment=noisy\nk_values=\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_config("experiment=noisy\ntrials=abc\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_config("experiment=warp-drive\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_config("experiment=phase-transition\nk_values=300\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_config("experiment=phase-transition\neps_values=0\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_config("experiment=tv-phantom\nline_counts=100\n"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { load_config(scratch("nope.cfg").string()); }), ErrorCode::config);
}

TEST(Config, HashTracksContentNotOutput) {
  const auto a = parse_config("experiment=dantzig\ntrials=10\n");
  auto b = parse_config("experiment=dantzig\ntrials=10\noutput=elsewhere\n");
  EXPECT_EQ(a.hash(), b.hash());
  b.master_seed = 99;
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(parse_config(a.canonical()).canonical(), a.canonical());
}

TEST(Config, ExperimentNamesRoundTrip) {
  for (auto k : {ExperimentKind::phase_transition, ExperimentKind::adaptive_eps, ExperimentKind::noisy,
                 ExperimentKind::dantzig, ExperimentKind::error_correction, ExperimentKind::tv_phantom,
                 ExperimentKind::gabor_pulse}) {
    EXPECT_EQ(experiment_from_string(to_string(k)), k);
    EXPECT_NO_THROW(defaults_for(k).validate());
  }
}

}  // namespace
