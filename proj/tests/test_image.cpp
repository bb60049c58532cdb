#include <fstream>

#include "doctest.h"
#include "semo/error.hpp"
#include "semo/image_io.hpp"
#include "support.hpp"

using namespace semo;

TEST_CASE("same-size resize is a copy") {
  const Frame f = testing::random_frame(3, 7, 9, 1);
  CHECK(resize_bilinear(f, 7, 9) == f);
}

TEST_CASE("resize keeps constant images constant") {
  Frame f(3, 13, 17, 0.37f);
  for (auto [h, w] : {std::pair{5, 5}, std::pair{40, 31}, std::pair{13, 60}}) {
    const Frame r = resize_bilinear(f, h, w);
    CHECK(r.height == h);
    CHECK(r.width == w);
    for (float v : r.data) CHECK(v == 0.37f);
  }
}

TEST_CASE("2x upsampling of a ramp interpolates at half-pixel centers") {
  Frame f(1, 1, 2);
  f(0, 0, 0) = 0.f;
  f(0, 0, 1) = 1.f;
  const Frame r = resize_bilinear(f, 1, 4);
  // Output centers map to source x = -0.25, 0.25, 0.75, 1.25 (clamped at the borders).
  CHECK(r(0, 0, 0) == doctest::Approx(0.0));
  CHECK(r(0, 0, 1) == doctest::Approx(0.25));
  CHECK(r(0, 0, 2) == doctest::Approx(0.75));
  CHECK(r(0, 0, 3) == doctest::Approx(1.0));
}

TEST_CASE("luma weights") {
  Frame f(3, 1, 1);
  f(0, 0, 0) = 1.f;
  CHECK(luma(f)(0, 0) == doctest::Approx(0.299));
  f(0, 0, 0) = 0.f;
  f(2, 0, 0) = 1.f;
  CHECK(luma(f)(0, 0) == doctest::Approx(0.114));
}

TEST_CASE("PNG round trip is exact at 8 bits") {
  testing::TempDir dir("png");
  Frame f(3, 5, 6);
  for (std::size_t i = 0; i < f.size(); ++i) f.data[i] = float(i % 256) / 255.f;
  write_frame_png(dir / "a.png", f);
  const Frame back = read_frame(dir / "a.png");
  REQUIRE(back.same_shape(f));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back.data[i] == doctest::Approx(f.data[i]).epsilon(1e-6));
}

TEST_CASE("gray PGM is replicated to three channels") {
  testing::TempDir dir("pgm");
  Plane<std::uint8_t> p(2, 3);
  p(1, 2) = 255;
  write_pgm(dir / "g.pgm", p);
  const Frame f = read_frame(dir / "g.pgm");
  CHECK(f.channels == 3);
  for (int c = 0; c < 3; ++c) CHECK(f(c, 1, 2) == 1.f);
  CHECK(f(0, 0, 0) == 0.f);
}

TEST_CASE("16-bit PGM keeps full range") {
  testing::TempDir dir("pgm16");
  Plane<std::uint16_t> p(1, 2);
  p(0, 0) = 1;
  p(0, 1) = 65535;
  write_pgm16(dir / "w.pgm", p);
  CHECK(read_gray(dir / "w.pgm") == p);
}

TEST_CASE("undecodable file names the file") {
  testing::TempDir dir("bad");
  std::ofstream(dir / "broken.png") << "not an image";
  try {
    read_frame(dir / "broken.png");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("broken.png") != std::string::npos);
  }
}
