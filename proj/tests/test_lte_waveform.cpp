#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "ambc/error.hpp"
#include "ambc/lte_waveform.hpp"
#include "oracle.hpp"

using namespace ambc;

TEST_CASE("10 MHz numerology") {
  const GridConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.n_subcarriers() == 600);
  CHECK(cfg.cp_length(0) == 80);
  CHECK(cfg.cp_length(3) == 72);
  CHECK(cfg.slot_samples() == 7680);
  CHECK(cfg.slot_samples() / cfg.sample_rate == doctest::Approx(kSlotDuration).epsilon(1e-12));
  CHECK(cfg.fft_bin(0) == 724);
  CHECK(cfg.fft_bin(299) == 1023);
  CHECK(cfg.fft_bin(300) == 1);
  CHECK(cfg.fft_bin(599) == 300);

  std::set<int> bins;
  for (int k = 0; k < 600; ++k) bins.insert(cfg.fft_bin(k));
  CHECK(bins.size() == 600);
  CHECK(bins.count(0) == 0);

  GridConfig small = cfg;
  small.fft_size = 512;
  small.sample_rate = 7.68e6;
  CHECK_THROWS_AS(small.validate(), Error);
  GridConfig wrong_rate = cfg;
  wrong_rate.sample_rate = 15e6;
  CHECK_THROWS_AS(wrong_rate.validate(), Error);
}

TEST_CASE("CRS layout: two symbols per slot, every sixth subcarrier") {
  for (int cell : {0, 1, 5, 7}) {
    CrsConfig crs;
    crs.cell_id = cell;
    const CrsTable table(crs, 600);
    CHECK(table.pilots_per_slot() == 200);
    for (long slot : {0L, 7L, 19L}) {
      for (std::size_t k = 0; k < 2; ++k) {
        const auto& pilots = table.pilots(slot, k);
        REQUIRE(pilots.size() == 100);
        for (std::size_t i = 0; i < pilots.size(); ++i) {
          CHECK(pilots[i].subcarrier == cell % 6 + 6 * static_cast<int>(i));
          CHECK(std::abs(pilots[i].value) == doctest::Approx(1.0).epsilon(1e-12));
          CHECK(std::abs(std::abs(pilots[i].value.real()) - std::abs(pilots[i].value.imag())) < 1e-12);
        }
      }
    }
  }
  CrsConfig crs;
  CHECK(crs.carries_crs(0));
  CHECK(crs.carries_crs(4));
  CHECK_FALSE(crs.carries_crs(1));
  CHECK_THROWS_AS(generate_crs_symbols(crs, 0, 2), Error);
}

TEST_CASE("CRS values repeat every radio frame and vary within it") {
  const CrsConfig crs;
  CHECK(generate_crs_symbols(crs, 3, 0) == generate_crs_symbols(crs, 23, 0));
  CHECK(generate_crs_symbols(crs, 3, 0) != generate_crs_symbols(crs, 4, 0));
  CHECK(generate_crs_symbols(crs, 3, 0) != generate_crs_symbols(crs, 3, 4));
  CrsConfig other;
  other.cell_id = 6;  // same shift, different cell
  CHECK(generate_crs_symbols(crs, 3, 0) != generate_crs_symbols(other, 3, 0));
}

TEST_CASE("traffic models") {
  CHECK(loaded_rbs(0.5, 50) == 25);
  CHECK(loaded_rbs(1.0, 50) == 50);
  CHECK(loaded_rbs(0.0, 50) == 0);

  const auto constant = traffic_loads(TrafficModel::constant(0.3), 100, 1);
  CHECK(std::all_of(constant.begin(), constant.end(), [](double v) { return v == 0.3; }));

  SUBCASE("on/off chain settles at its stationary duty") {
    const auto model = TrafficModel::bursty(0.5, 0.1);
    const auto loads = traffic_loads(model, 100000, 7);
    const double duty = std::accumulate(loads.begin(), loads.end(), 0.0) / loads.size();
    CHECK(duty == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(duty - 0.5) <= 0.01);
  }
  SUBCASE("bursty duty 0.25") {
    const auto model = TrafficModel::bursty(0.25, 0.1);
    CHECK(model.stationary_duty() == doctest::Approx(0.25));
    const auto loads = traffic_loads(model, 100000, 8);
    const double duty = std::accumulate(loads.begin(), loads.end(), 0.0) / loads.size();
    CHECK(std::abs(duty - 0.25) <= 0.01);
  }
  SUBCASE("mean on-period is 1 / p_on_to_off subframes") {
    const auto loads = traffic_loads(TrafficModel::bursty(0.5, 0.1), 100000, 9);
    std::size_t runs = 0, on = 0;
    for (std::size_t i = 0; i < loads.size(); ++i) {
      if (loads[i] > 0) {
        ++on;
        if (i == 0 || loads[i - 1] == 0) ++runs;
      }
    }
    CHECK(static_cast<double>(on) / runs == doctest::Approx(10.0).epsilon(0.05));
  }
  CHECK_THROWS_AS(TrafficModel::bursty(1.0), Error);
  TrafficModel bad;
  bad.p_on_to_off = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("resource grid contents follow the traffic load") {
  const GridConfig cfg;
  const CrsConfig crs;
  TrafficModel full = TrafficModel::constant(1.0);
  full.data_re_power = 2.0;
  const auto grid = build_grid(cfg, crs, full, 0.001, 3);
  REQUIRE(grid.n_symbols() == 14);
  std::size_t n_crs = 0, n_data = 0;
  for (int s = 0; s < grid.n_symbols(); ++s) {
    for (int k = 0; k < 600; ++k) {
      const auto kind = grid.kind(k, s);
      if (kind == ReKind::crs) {
        ++n_crs;
        CHECK(std::norm(grid.at(k, s)) == doctest::Approx(1.0));
      } else {
        CHECK(kind == ReKind::data);
        ++n_data;
        CHECK(std::norm(grid.at(k, s)) == doctest::Approx(2.0));
      }
    }
  }
  CHECK(n_crs == 400);
  CHECK(n_data == 14 * 600 - 400);

  const auto idle = build_grid(cfg, crs, TrafficModel::constant(0.0), 0.001, 3);
  for (int s = 0; s < idle.n_symbols(); ++s) {
    for (int k = 0; k < 600; ++k) {
      if (idle.kind(k, s) != ReKind::crs) CHECK(idle.at(k, s) == cdouble{});
    }
  }

  const auto half = build_grid(cfg, crs, TrafficModel::constant(0.5), 0.001, 3);
  for (int k = 0; k < 600; ++k) {
    const auto kind = half.kind(k, 1);
    CHECK(kind == (k < 300 ? ReKind::data : ReKind::empty));
  }

  try {
    build_grid(cfg, crs, full, 0.0004, 1);
    FAIL("sub-slot duration accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::insufficient_data);
  }
}

TEST_CASE("grid blocks concatenate to the full grid") {
  const GridConfig cfg;
  const CrsConfig crs;
  const auto traffic = TrafficModel::bursty(0.5, 0.1);
  const auto whole = build_grid(cfg, crs, traffic, 0.02, 11);
  const auto loads = traffic_loads(traffic, 20, 11);
  const auto a = build_grid_block(cfg, crs, loads, 1.0, 0, 17, 11);
  const auto b = build_grid_block(cfg, crs, loads, 1.0, 17, 23, 11);
  const auto cells = whole.cells();
  const auto ca = a.cells();
  const auto cb = b.cells();
  REQUIRE(ca.size() + cb.size() == cells.size());
  CHECK(std::equal(ca.begin(), ca.end(), cells.begin()));
  CHECK(std::equal(cb.begin(), cb.end(), cells.begin() + static_cast<std::ptrdiff_t>(ca.size())));
  CHECK_THROWS_AS(build_grid_block(cfg, crs, loads, 1.0, 30, 20, 11), Error);
}

TEST_CASE("OFDM synthesis: cyclic prefix, Parseval and a direct DFT") {
  const GridConfig cfg;
  const CrsConfig crs;
  const auto grid = build_grid(cfg, crs, TrafficModel::constant(0.7), 0.0005, 5);
  const auto tx = synthesize_baseband(grid, cfg);
  REQUIRE(tx.samples.size() == 7680);
  CHECK(tx.duration() == doctest::Approx(0.5e-3));

  std::size_t pos = 0;
  for (int l = 0; l < kSymbolsPerSlot; ++l) {
    const int cp = cfg.cp_length(l);
    for (int i = 0; i < cp; ++i) CHECK(tx.samples[pos + i] == tx.samples[pos + 1024 + i]);
    double body = 0.0;
    for (int i = 0; i < 1024; ++i) body += std::norm(tx.samples[pos + cp + i]);
    double freq = 0.0;
    for (const auto& v : grid.symbol(l)) freq += std::norm(v);
    CHECK(std::abs(body - freq) <= 1e-9 * freq);
    pos += static_cast<std::size_t>(cp + 1024);
  }

  std::vector<std::complex<double>> bins(1024);
  for (int k = 0; k < 600; ++k) bins[cfg.fft_bin(k)] = grid.at(k, 4);
  const auto direct = oracle::naive_dft(bins, true);
  const std::size_t start = static_cast<std::size_t>(cfg.symbol_offset(4) + cfg.cp_length(4));
  double err = 0.0;
  for (int i = 0; i < 1024; ++i) err = std::max(err, std::abs(direct[i] - tx.samples[start + i]));
  CHECK(err < 1e-9);
}

TEST_CASE("front end inverts the synthesis") {
  const GridConfig cfg;
  const auto grid = build_grid(cfg, CrsConfig{}, TrafficModel::constant(1.0), 0.001, 9);
  const auto rx = demodulate_baseband(synthesize_baseband(grid, cfg), cfg);
  REQUIRE(rx.n_symbols() == grid.n_symbols());
  CHECK_FALSE(rx.has_mask());
  double err = 0.0;
  for (std::size_t i = 0; i < rx.cells().size(); ++i) err = std::max(err, std::abs(rx.cells()[i] - grid.cells()[i]));
  CHECK(err < 1e-12);

  SampleBuffer wrong = synthesize_baseband(grid, cfg);
  wrong.sample_rate = 30.72e6;
  try {
    demodulate_baseband(wrong, cfg);
    FAIL("wrong rate accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::representation_mismatch);
  }
}

TEST_CASE("grid snapshots round-trip") {
  const GridConfig cfg;
  CrsConfig crs;
  crs.cell_id = 4;
  const auto grid = build_grid(cfg, crs, TrafficModel::constant(0.5), 0.0005, 2);
  std::stringstream buf;
  write_grid_snapshot(buf, grid, cfg, crs);
  const auto snap = read_grid_snapshot(buf);
  CHECK(snap.crs_config.cell_id == 4);
  CHECK(snap.grid_config.fft_size == 1024);
  REQUIRE(snap.grid.n_symbols() == grid.n_symbols());
  for (int s = 0; s < grid.n_symbols(); ++s) {
    for (int k = 0; k < 600; ++k) {
      CHECK(std::abs(snap.grid.at(k, s) - grid.at(k, s)) < 1e-6);
    }
  }
  std::stringstream truncated(buf.str().substr(0, 20));
  CHECK_THROWS_AS(read_grid_snapshot(truncated), Error);
}
