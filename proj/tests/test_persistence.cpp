#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "eoc/checkpoint.hpp"
#include "eoc/config.hpp"
#include "eoc/csv.hpp"
#include "eoc/error.hpp"
#include "eoc/random.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using eoc::ckpt::CheckpointError;

namespace {

fs::path temp(const std::string& name) { return fs::temp_directory_path() / ("eoc_persist_" + name); }

std::vector<char> bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<char>& b) {
  std::ofstream(p, std::ios::binary | std::ios::trunc).write(b.data(), static_cast<std::streamsize>(b.size()));
}

eoc::ckpt::Checkpoint sample_checkpoint() {
  eoc::ckpt::Checkpoint ck;
  ck.epoch = 42;
  ck.params = eoc::train::init_params({9, 3, 4}, 5);
  ck.params.b_out = -0.0;
  ck.params.W_hc(1, 2) = std::numeric_limits<double>::denorm_min();
  ck.adam = eoc::train::AdamState::for_params(ck.params, 0.003);
  ck.adam.step_count = 17;
  ck.adam.m = eoc::train::init_params({9, 3, 4}, 6);
  ck.adam.v = eoc::train::init_params({9, 3, 4}, 7);
  return ck;
}

std::vector<std::uint64_t> bits(const eoc::Params& p) {
  std::vector<std::uint64_t> out;
  for (const double v : oracle::flatten(p)) out.push_back(std::bit_cast<std::uint64_t>(v));
  return out;
}

CheckpointError::Kind load_error(const fs::path& p, std::string* message = nullptr,
                                 std::optional<eoc::ModelDims> dims = std::nullopt) {
  try {
    eoc::ckpt::load_checkpoint(p.string(), dims);
  } catch (const CheckpointError& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("load unexpectedly succeeded");
  return CheckpointError::Kind::kIo;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  const auto ck = sample_checkpoint();
  const auto path = temp("rt.bin");
  eoc::ckpt::save_checkpoint(path.string(), ck);
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  const auto back = eoc::ckpt::load_checkpoint(path.string(), eoc::ModelDims{9, 3, 4});
  CHECK(back.epoch == 42);
  CHECK(bits(back.params) == bits(ck.params));
  CHECK(bits(back.adam.m) == bits(ck.adam.m));
  CHECK(bits(back.adam.v) == bits(ck.adam.v));
  CHECK(back.adam.step_count == 17);
  CHECK(back.adam.lr == 0.003);
  CHECK(back.adam.beta1 == 0.9);
  CHECK(back.adam.beta2 == 0.999);
  CHECK(back.adam.eps == 1e-8);
  CHECK(std::signbit(back.params.b_out));

  const auto again = temp("rt2.bin");
  eoc::ckpt::save_checkpoint(again.string(), back);
  CHECK(bytes_of(path) == bytes_of(again));
  fs::remove(path);
  fs::remove(again);
}

TEST_CASE("checkpoint layout is little-endian row-major") {
  const auto ck = sample_checkpoint();
  const auto path = temp("layout.bin");
  eoc::ckpt::save_checkpoint(path.string(), ck);
  const auto b = bytes_of(path);
  CHECK(std::string(b.data(), 8) == "LSTMCK01");
  auto u32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + k])) << (8 * k);
    return v;
  };
  auto f64 = [&](std::size_t at) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[at + k])) << (8 * k);
    return std::bit_cast<double>(v);
  };
  CHECK(u32(8) == 9);
  CHECK(u32(12) == 3);
  CHECK(u32(16) == 4);
  CHECK(u32(20) == 42);
  // embedding is 9 x 3; the second stored value is row 0, column 1
  CHECK(f64(24 + 8 * 4) == ck.params.embedding(1, 1));
  CHECK(f64(24 + 8 * 5) == ck.params.embedding(1, 2));
  const std::size_t n_params = static_cast<std::size_t>(ck.params.parameter_count());
  CHECK(b.size() == 24 + 8 * n_params + 8 + 32 + 2 * 8 * n_params);
  fs::remove(path);
}

TEST_CASE("checkpoint errors are distinct") {
  const auto ck = sample_checkpoint();
  const auto path = temp("err.bin");
  eoc::ckpt::save_checkpoint(path.string(), ck);
  const auto good = bytes_of(path);

  CHECK(load_error(temp("does_not_exist.bin")) == CheckpointError::Kind::kIo);

  auto bad = good;
  bad[7] = '2';
  write_bytes(path, bad);
  CHECK(load_error(path) == CheckpointError::Kind::kBadMagic);

  // Cut in the middle of W_hf (embedding 27 values, four W_x* of 12, W_hi 16).
  const std::size_t cut = 24 + 8 * (27 + 48 + 16 + 5);
  write_bytes(path, std::vector<char>(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut)));
  std::string msg;
  CHECK(load_error(path, &msg) == CheckpointError::Kind::kTruncated);
  CHECK(msg.find("W_hf") != std::string::npos);

  write_bytes(path, std::vector<char>(good.begin(), good.end() - 3));
  CHECK(load_error(path, &msg) == CheckpointError::Kind::kTruncated);
  CHECK(msg.find("adam.v") != std::string::npos);

  write_bytes(path, good);
  CHECK(load_error(path, nullptr, eoc::ModelDims{9, 3, 5}) == CheckpointError::Kind::kDimMismatch);
  fs::remove(path);
}

TEST_CASE("number formatting is shortest round trip") {
  using eoc::csv::format_number;
  using eoc::csv::parse_number;
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-15.0) == "-15");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(std::isnan(parse_number("nan")));
  CHECK(parse_number("-inf") == -INFINITY);
  CHECK_THROWS_AS(parse_number("1.5x"), eoc::IoError);

  eoc::RandomStream rng(3, eoc::StreamTag::kTest);
  for (int k = 0; k < 20000; ++k) {
    const double v = std::bit_cast<double>(rng.next_u64());
    if (!std::isfinite(v)) continue;
    const std::string s = format_number(v);
    CHECK(parse_number(s) == v);
    std::string mantissa;
    for (const char ch : s.substr(0, s.find('e'))) {
      if (std::isdigit(static_cast<unsigned char>(ch))) mantissa += ch;
    }
    mantissa.erase(0, mantissa.find_first_not_of('0'));
    mantissa.erase(mantissa.find_last_not_of('0') + 1);
    CHECK(mantissa.size() <= 17);
  }
}

TEST_CASE("csv writer and reader") {
  const auto path = temp("t.csv");
  {
    eoc::csv::Writer w(path.string(), {"a", "b", "c"});
    w.flush();
  }
  CHECK(bytes_of(path) == std::vector<char>{'a', ',', 'b', ',', 'c', '\n'});
  {
    eoc::csv::Writer w(path.string(), {"a", "b", "c"});
    w.cell(0.1).cell(std::int64_t{7}).cell(std::string_view("x"));
    w.end_row();
  }
  {
    eoc::csv::Writer w(temp("short.csv").string(), {"a", "b"});
    w.cell(1.0);
    CHECK_THROWS(w.end_row());
  }
  fs::remove(temp("short.csv"));
  {
    eoc::csv::Writer w(path.string(), {"a", "b", "c"}, true);
    w.cell(2.5).cell(std::int64_t{-1}).cell(std::string_view("y"));
    w.end_row();
  }
  const auto t = eoc::csv::read(path.string());
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == eoc::csv::Row{"0.1", "7", "x"});
  CHECK(t.rows[1] == eoc::csv::Row{"2.5", "-1", "y"});
  CHECK(t.column("c") == 2);
  CHECK_THROWS_AS(t.column("zzz"), eoc::IoError);
  CHECK_THROWS_AS(eoc::csv::read(temp("missing.csv").string()), eoc::IoError);
  fs::remove(path);
}

TEST_CASE("config text round trip and presets") {
  const auto desk = eoc::preset_config("desk");
  CHECK(desk.seq_len == 60);
  CHECK(desk.probe_t_total == 480);
  CHECK(desk.embed_dim == 8);
  CHECK(desk.hidden_dim == 16);
  CHECK(desk.probe_n_samples == 100);
  CHECK(desk.epochs == 600);
  CHECK(desk.lr == 0.005);
  CHECK(desk.synth.signal_strength == 0.6);
  CHECK(desk.synth.n_reviews == 2000);
  const auto paper = eoc::preset_config("paper");
  CHECK(paper.seq_len == 500);
  CHECK(paper.probe_t_total == 1600);
  CHECK(paper.embed_dim == 32);
  CHECK(paper.hidden_dim == 60);
  CHECK(paper.probe_n_samples == 500);
  CHECK(paper.lr == 0.0005);
  CHECK(paper.train_fraction == 0.7);
  CHECK_THROWS_AS(eoc::preset_config("huge"), eoc::ConfigError);

  auto c = desk;
  c.seed = 99;
  c.synth.signal_strength = 0.123456789;
  c.analysis.drop_fraction = 0.25;
  c.out_dir = "some/where";
  c.probe_enabled = false;
  const auto back = eoc::parse_config(eoc::to_text(c));
  CHECK(eoc::to_text(back) == eoc::to_text(c));
  CHECK(back.seed == 99);
  CHECK(back.synth.signal_strength == 0.123456789);
  CHECK(back.analysis.drop_fraction == 0.25);
  CHECK_FALSE(back.probe_enabled);
}

TEST_CASE("config parsing rules") {
  const auto c = eoc::parse_config("# comment\ntrain.epochs = 7\n\npreset = paper\nseed=3\n");
  CHECK(c.epochs == 7);
  CHECK(c.seed == 3);
  CHECK(c.hidden_dim == 60);
  CHECK_THROWS_AS(eoc::parse_config("bogus.key = 1\n"), eoc::ConfigError);
  CHECK_THROWS_AS(eoc::parse_config("train.epochs = seven\n"), eoc::ConfigError);
  CHECK_THROWS_AS(eoc::parse_config("just words\n"), eoc::ConfigError);
  CHECK_THROWS_AS(eoc::load_config(temp("nope.txt").string()), eoc::IoError);
  auto bad = eoc::preset_config("desk");
  bad.train_fraction = 1.0;
  CHECK_THROWS_AS(bad.validate(), eoc::ConfigError);
  const auto pc = eoc::parse_config("corpus.seq_len = 30\nseed = 4\n").probe_config();
  CHECK(pc.l_real == 30);
  CHECK(pc.master_seed == 4);
}
