#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "lembill/engine.hpp"
#include "lembill/shares.hpp"
#include "test_util.hpp"

using namespace lembill;
using namespace lembill::testutil;

namespace {
const Backend kBackends[2] = {Backend::Rep3, Backend::Additive};

// Plaintext oracle for the sign test.
int sign_of(uint64_t v) {
  int64_t s = static_cast<int64_t>(v);
  return s > 0 ? 1 : (s < 0 ? -1 : 0);
}
}  // namespace

TEST_CASE("share round trip over random values") {
  std::mt19937_64 rng(5);
  for (Backend b : kBackends) {
    for (int i = 0; i < 100000; ++i) {
      uint64_t x = rng();
      auto sh = share_arith(b, x, rng);
      CHECK(reconstruct_arith(b, sh) == x);
    }
  }
}

TEST_CASE("replicated reconstruction works from any two parties") {
  std::mt19937_64 rng(6);
  uint64_t x = 0xfeedfacecafef00dULL;
  auto sh = share_arith(Backend::Rep3, x, rng);
  for (int i = 0; i < 3; ++i) {
    std::array<ArithShare, 2> two{sh[i], sh[next_party(i)]};
    CHECK(reconstruct_arith(Backend::Rep3, two) == x);
  }
  CHECK(shares_consistent(Backend::Rep3, sh));
}

TEST_CASE("missing contributions are rejected") {
  std::mt19937_64 rng(7);
  auto rep = share_arith(Backend::Rep3, 7, rng);
  std::array<ArithShare, 1> one{rep[0]};
  CHECK_THROWS_AS((void)reconstruct_arith(Backend::Rep3, one), ProtocolError);

  auto add = share_arith(Backend::Additive, 7, rng);
  std::array<ArithShare, 2> two{add[0], add[1]};
  CHECK_THROWS_AS((void)reconstruct_arith(Backend::Additive, two), ProtocolError);
}

TEST_CASE("signed values survive the ring embedding") {
  std::mt19937_64 rng(8);
  for (Backend b : kBackends) {
    auto sh = share_arith(b, RingValue::from_signed(-5).raw, rng);
    CHECK(static_cast<int64_t>(reconstruct_arith(b, sh)) == -5);
  }
}

TEST_CASE("sharings of equal secrets differ") {
  std::mt19937_64 rng(9);
  for (Backend b : kBackends) {
    auto s1 = share_arith(b, 42, rng);
    auto s2 = share_arith(b, 42, rng);
    CHECK(s1[0].c[0] != s2[0].c[0]);
    CHECK(reconstruct_arith(b, s1) == reconstruct_arith(b, s2));
  }
}

TEST_CASE("linear gates are local and correct") {
  for (Backend b : kBackends) {
    auto xs = deal_value(b, 5, 101);
    auto ys = deal_value(b, 7, 102);
    auto ms = deal_value(b, 100, 103);
    auto results = run_parties(b, {}, 1, [&](PartyEngine& eng) -> std::vector<uint64_t> {
      int i = eng.party();
      ArithShare sum = eng.add(xs[i], ys[i]);
      ArithShare diff = eng.sub(xs[i], xs[i]);
      ArithShare scaled = eng.mul_public(ms[i], 100000);
      ArithShare shifted = eng.add_public(xs[i], 10);
      std::array<ArithShare, 4> batch{sum, diff, scaled, shifted};
      return eng.open(batch, OpenTag::MaskedCompare);
    });
    for (const auto& r : results) {
      CHECK(r[0] == 12);
      CHECK(r[1] == 0);
      CHECK(r[2] == 10'000'000);
      CHECK(r[3] == 15);
    }
    // No interactive rounds besides the single open.
  }
}

TEST_CASE("multiplication gate fixed examples") {
  for (Backend b : kBackends) {
    auto xs = deal_value(b, 6, 201);
    auto ys = deal_value(b, 7, 202);
    auto ms = deal_value(b, 100, 203);
    auto ds = deal_value(b, 1, 204);
    PreprocessingBudget budget;
    budget.triples = 4;
    auto results = run_parties(b, budget, 2, [&](PartyEngine& eng) -> std::vector<uint64_t> {
      int i = eng.party();
      std::array<ArithShare, 2> lhs{xs[i], ms[i]}, rhs{ys[i], ds[i]};
      auto prods = eng.mul(lhs, rhs);
      return eng.open(prods, OpenTag::MaskedCompare);
    });
    for (const auto& r : results) {
      CHECK(r[0] == 42);
      CHECK(r[1] == 100);
    }
  }
}

TEST_CASE("multiplication on random pairs") {
  std::mt19937_64 rng(55);
  constexpr size_t kPairs = 10000;
  for (Backend b : kBackends) {
    std::vector<uint64_t> xs(kPairs), ys(kPairs);
    std::array<std::vector<ArithShare>, 3> xsh, ysh;
    for (auto& v : xsh) v.resize(kPairs);
    for (auto& v : ysh) v.resize(kPairs);
    for (size_t k = 0; k < kPairs; ++k) {
      xs[k] = rng();
      ys[k] = rng();
      auto sx = share_arith(b, xs[k], rng);
      auto sy = share_arith(b, ys[k], rng);
      for (int i = 0; i < 3; ++i) {
        xsh[i][k] = sx[i];
        ysh[i][k] = sy[i];
      }
    }
    PreprocessingBudget budget;
    budget.triples = kPairs;
    auto results = run_parties(b, budget, 3, [&](PartyEngine& eng) {
      auto prods = eng.mul(xsh[eng.party()], ysh[eng.party()]);
      return eng.open(prods, OpenTag::MaskedCompare);
    });
    for (size_t k = 0; k < kPairs; ++k) CHECK(results[0][k] == xs[k] * ys[k]);
    CHECK(results[0] == results[1]);
    CHECK(results[1] == results[2]);
  }
}

TEST_CASE("binary AND of shared bits") {
  std::mt19937_64 rng(66);
  for (Backend b : kBackends) {
    std::array<std::vector<BitShare>, 3> xsh, ysh;
    std::vector<uint8_t> xs, ys;
    for (uint8_t x : {0, 1})
      for (uint8_t y : {0, 1}) {
        auto sx = share_bit(b, x, rng);
        auto sy = share_bit(b, y, rng);
        for (int i = 0; i < 3; ++i) {
          xsh[i].push_back(sx[i]);
          ysh[i].push_back(sy[i]);
        }
        xs.push_back(x);
        ys.push_back(y);
      }
    PreprocessingBudget budget;
    budget.bit_triples = 4;
    auto results = run_parties(b, budget, 4, [&](PartyEngine& eng) {
      auto prods = eng.band(xsh[eng.party()], ysh[eng.party()]);
      return eng.open_bits(prods, OpenTag::MaskedCompare);
    });
    for (size_t k = 0; k < xs.size(); ++k) CHECK(results[0][k] == (xs[k] & ys[k]));
  }
}

TEST_CASE("arithmetic bit product acts as logical AND") {
  std::mt19937_64 rng(67);
  for (Backend b : kBackends) {
    for (uint64_t c : {0ULL, 1ULL})
      for (uint64_t d : {0ULL, 1ULL}) {
        auto sc = share_arith(b, c, rng);
        auto sd = share_arith(b, d, rng);
        PreprocessingBudget budget;
        budget.triples = 1;
        auto results = run_parties(b, budget, 5, [&](PartyEngine& eng) {
          int i = eng.party();
          std::array<ArithShare, 1> lhs{sc[i]}, rhs{sd[i]};
          return eng.open(eng.mul(lhs, rhs), OpenTag::MaskedCompare)[0];
        });
        CHECK(results[0] == (c & d));
      }
  }
}

namespace {

// Runs the oblivious sign gadget over `values` and checks both output bits
// against the plaintext oracle.
void check_sign_batch(Backend b, const std::vector<uint64_t>& values, uint64_t seed) {
  std::mt19937_64 rng(seed);
  size_t n = values.size();
  std::array<std::vector<ArithShare>, 3> vsh;
  for (auto& v : vsh) v.resize(n);
  for (size_t k = 0; k < n; ++k) {
    auto sv = share_arith(b, values[k], rng);
    for (int i = 0; i < 3; ++i) vsh[i][k] = sv[i];
  }
  PreprocessingBudget budget;
  budget.masks = n;
  if (b == Backend::Additive) budget.bit_triples = uint64_t(comparison_and_count()) * n;

  auto results = run_parties(b, budget, seed ^ 0x5151, [&](PartyEngine& eng) {
    SignBits bits = eng.compare_sign(vsh[eng.party()]);
    auto gt = eng.open_bits(bits.gt, OpenTag::MaskedCompare);
    auto lt = eng.open_bits(bits.lt, OpenTag::MaskedCompare);
    return std::pair(gt, lt);
  });
  for (size_t k = 0; k < n; ++k) {
    int s = sign_of(values[k]);
    REQUIRE(results[0].first[k] == (s > 0 ? 1 : 0));
    REQUIRE(results[0].second[k] == (s < 0 ? 1 : 0));
  }
}

}  // namespace

TEST_CASE("sign gadget on landmark values") {
  std::vector<uint64_t> landmarks;
  const int64_t interesting[] = {0, 1, -1, 20, -10, INT64_MAX, INT64_MIN, INT64_MIN + 1};
  for (int64_t v : interesting) landmarks.push_back(static_cast<uint64_t>(v));
  for (Backend b : kBackends) check_sign_batch(b, landmarks, 77);
}

TEST_CASE("sign gadget matches the oracle exhaustively on [-1000, 1000]") {
  std::vector<uint64_t> values;
  for (int64_t v = -1000; v <= 1000; ++v) values.push_back(static_cast<uint64_t>(v));
  for (Backend b : kBackends) check_sign_batch(b, values, 78);
}

TEST_CASE("sign gadget matches the oracle on random 64-bit values") {
  std::mt19937_64 rng(79);
  std::vector<uint64_t> values(10000);
  for (auto& v : values) v = rng();
  for (Backend b : kBackends) check_sign_batch(b, values, 80);
}

TEST_CASE("bit conversion round trip") {
  std::mt19937_64 rng(90);
  constexpr size_t kBits = 10000;
  for (Backend b : kBackends) {
    std::vector<uint8_t> bits(kBits);
    std::array<std::vector<BitShare>, 3> bsh;
    for (auto& v : bsh) v.resize(kBits);
    for (size_t k = 0; k < kBits; ++k) {
      bits[k] = static_cast<uint8_t>(rng() & 1);
      auto sb = share_bit(b, bits[k], rng);
      for (int i = 0; i < 3; ++i) bsh[i][k] = sb[i];
    }
    PreprocessingBudget budget;
    budget.dabits = kBits;
    auto results = run_parties(b, budget, 91, [&](PartyEngine& eng) {
      auto arith = eng.bit_to_arith(bsh[eng.party()]);
      return eng.open(arith, OpenTag::MaskedCompare);
    });
    for (size_t k = 0; k < kBits; ++k) REQUIRE(results[0][k] == bits[k]);
  }
}

TEST_CASE("preprocessing exhaustion is reported") {
  auto xs = deal_value(Backend::Additive, 3, 301);
  auto ys = deal_value(Backend::Additive, 4, 302);
  CHECK_THROWS_AS(run_parties(Backend::Additive, {}, 6,
                              [&](PartyEngine& eng) {
                                int i = eng.party();
                                std::array<ArithShare, 1> lhs{xs[i]}, rhs{ys[i]};
                                return eng.mul(lhs, rhs);
                              }),
                  ProtocolError);

  for (Backend b : kBackends) {
    auto vs = deal_value(b, 5, 303);
    try {
      run_parties(b, {}, 7, [&](PartyEngine& eng) {
        std::array<ArithShare, 1> v{vs[eng.party()]};
        return eng.compare_sign(v).gt.size();
      });
      FAIL("expected MaskExhausted");
    } catch (const ProtocolError& e) {
      CHECK(e.code() == Errc::MaskExhausted);
    }
  }
}

TEST_CASE("dealer self tests") {
  PreprocessingBudget budget;
  budget.triples = 1000;
  budget.bit_triples = 1000;
  budget.masks = 1000;
  budget.dabits = 1000;
  for (Backend b : kBackends) {
    auto stores = deal_preprocessing(b, budget, 404);
    if (b == Backend::Additive) {
      REQUIRE(stores[0].triples.size() == 1000);
      for (size_t k = 0; k < 1000; ++k) {
        std::array<ArithShare, 3> a{stores[0].triples[k].a, stores[1].triples[k].a,
                                    stores[2].triples[k].a};
        std::array<ArithShare, 3> bb{stores[0].triples[k].b, stores[1].triples[k].b,
                                     stores[2].triples[k].b};
        std::array<ArithShare, 3> c{stores[0].triples[k].c, stores[1].triples[k].c,
                                    stores[2].triples[k].c};
        REQUIRE(reconstruct_arith(b, c) ==
                reconstruct_arith(b, a) * reconstruct_arith(b, bb));
      }
      for (size_t k = 0; k < 1000; ++k) {
        std::array<BitShare, 3> a{stores[0].bit_triples[k].a, stores[1].bit_triples[k].a,
                                  stores[2].bit_triples[k].a};
        std::array<BitShare, 3> bb{stores[0].bit_triples[k].b, stores[1].bit_triples[k].b,
                                   stores[2].bit_triples[k].b};
        std::array<BitShare, 3> c{stores[0].bit_triples[k].c, stores[1].bit_triples[k].c,
                                  stores[2].bit_triples[k].c};
        REQUIRE(reconstruct_bit(b, c) == (reconstruct_bit(b, a) & reconstruct_bit(b, bb)));
      }
    } else {
      // Zero-sharing keys are pairwise consistent in the replicated layout.
      for (int i = 0; i < 3; ++i)
        REQUIRE(stores[i].zero_keys[1] == stores[next_party(i)].zero_keys[0]);
    }
    for (size_t k = 0; k < 1000; ++k) {
      std::array<ArithShare, 3> r{stores[0].masks[k].r, stores[1].masks[k].r,
                                  stores[2].masks[k].r};
      uint64_t rv = reconstruct_arith(b, r);
      uint64_t from_bits = 0;
      for (int j = 0; j < 64; ++j) {
        std::array<BitShare, 3> bit{stores[0].masks[k].r_bits[j], stores[1].masks[k].r_bits[j],
                                    stores[2].masks[k].r_bits[j]};
        from_bits |= static_cast<uint64_t>(reconstruct_bit(b, bit)) << j;
      }
      REQUIRE(from_bits == rv);
    }
    for (size_t k = 0; k < 1000; ++k) {
      std::array<BitShare, 3> bin{stores[0].dabits[k].binary, stores[1].dabits[k].binary,
                                  stores[2].dabits[k].binary};
      std::array<ArithShare, 3> ar{stores[0].dabits[k].arith, stores[1].dabits[k].arith,
                                   stores[2].dabits[k].arith};
      REQUIRE(reconstruct_bit(b, bin) == reconstruct_arith(b, ar));
    }
  }
}

TEST_CASE("sign gadget transcript shape is value independent") {
  for (Backend b : kBackends) {
    auto shape_for = [&](int64_t value) {
      auto vs = deal_value(b, static_cast<uint64_t>(value), 500 + static_cast<uint64_t>(value));
      PreprocessingBudget budget;
      budget.masks = 1;
      if (b == Backend::Additive) budget.bit_triples = comparison_and_count();
      return run_parties_captured(b, budget, 501, [&](PartyEngine& eng) {
        std::array<ArithShare, 1> v{vs[eng.party()]};
        eng.compare_sign(v);
      });
    };
    auto pos = shape_for(987654321);
    auto neg = shape_for(-123456789);
    for (int i = 0; i < 3; ++i) {
      REQUIRE(pos[i].shape.size() == neg[i].shape.size());
      for (size_t k = 0; k < pos[i].shape.size(); ++k) {
        CHECK(pos[i].shape[k].phase == neg[i].shape[k].phase);
        CHECK(pos[i].shape[k].to == neg[i].shape[k].to);
        CHECK(pos[i].shape[k].bytes == neg[i].shape[k].bytes);
      }
      CHECK(pos[i].rounds == neg[i].rounds);
    }
  }
}

TEST_CASE("share views look uniform per byte lane") {
  // Chi-square per byte lane over many sharings of a fixed secret, at the
  // 0.01 significance level (df = 255). Deterministic seed.
  constexpr int kSamples = 10000;
  const double critical = chi_square_critical_99(255);

  auto lane_check = [&](Backend b, uint64_t secret, uint64_t seed) {
    std::mt19937_64 rng(seed);
    // rep3: single-party views (pairs); additive: two-party views.
    std::vector<std::vector<uint32_t>> lanes(3 * 16, std::vector<uint32_t>(256, 0));
    for (int s = 0; s < kSamples; ++s) {
      auto sh = share_arith(b, secret, rng);
      for (int view = 0; view < 3; ++view) {
        uint64_t w0, w1;
        if (b == Backend::Rep3) {
          w0 = sh[view].c[0];
          w1 = sh[view].c[1];
        } else {
          w0 = sh[view].c[0];
          w1 = sh[next_party(view)].c[0];
        }
        for (int byte = 0; byte < 8; ++byte) {
          lanes[view * 16 + byte][(w0 >> (8 * byte)) & 0xff] += 1;
          lanes[view * 16 + 8 + byte][(w1 >> (8 * byte)) & 0xff] += 1;
        }
      }
    }
    for (const auto& lane : lanes) CHECK(chi_square_bytes(lane, kSamples) < critical);
  };

  for (Backend b : kBackends) {
    lane_check(b, 0, 0x600d5eed);           // inactive users' zero inputs
    lane_check(b, 123456789, 0x600d5eed);   // and an arbitrary fixed secret
  }
}

TEST_CASE("engine runs are deterministic") {
  for (Backend b : kBackends) {
    auto run_once = [&] {
      auto vs = deal_value(b, static_cast<uint64_t>(-777), 601);
      PreprocessingBudget budget;
      budget.masks = 1;
      budget.dabits = 2;
      budget.triples = 1;
      if (b == Backend::Additive) budget.bit_triples = comparison_and_count();
      return run_parties(b, budget, 602, [&](PartyEngine& eng) {
        std::array<ArithShare, 1> v{vs[eng.party()]};
        SignBits bits = eng.compare_sign(v);
        std::array<BitShare, 2> both{bits.gt[0], bits.lt[0]};
        auto arith = eng.bit_to_arith(both);
        return eng.open(arith, OpenTag::MaskedCompare);
      });
    };
    auto a = run_once();
    auto bres = run_once();
    CHECK(a == bres);
    CHECK(a[0][0] == 0);  // -777 is not positive
    CHECK(a[0][1] == 1);
  }
}
