#include <catch2/catch_amalgamated.hpp>

#include "reputeq/game.hpp"
#include "reputeq/rational.hpp"

using namespace reputeq;

TEST_CASE("gamma_star basics") {
  CHECK(gamma_star<Rat>(Rat(1), Rat(1)) == Rat(1, 2));
  CHECK(gamma_star<Rat>(Rat(3), Rat(1)) == Rat(1, 4));
  CHECK_THROWS_AS(gamma_star<Rat>(Rat(0), Rat(1)), Error);
  CHECK_THROWS_AS(gamma_star<double>(1.0, -2.0), Error);
}

TEST_CASE("canonical closed-form payoffs") {
  Rat th1(1, 5), th2(1, 2), gs(1, 2);
  CHECK(stackelberg_payoff(th1, gs) == Rat(9, 10));
  CHECK(stackelberg_payoff(th2, gs) == Rat(3, 4));
  CHECK(v_star(th1, th1, gs) == Rat(4, 5));
  CHECK(v_star(th2, th1, gs) == Rat(2, 3));
}

TEST_CASE("value vector at the target trust frequency") {
  // gamma = 3/5 on the canonical instance: weights 1/11, 6/11, 4/11.
  Rat th1(1, 5), gamma(3, 5);
  ValueWeights<Rat> w = v_weights(th1, gamma);
  CHECK(w.pN == Rat(1, 11));
  CHECK(w.pH == Rat(6, 11));
  CHECK(w.pL == Rat(4, 11));
  CHECK(w.pN + w.pH + w.pL == Rat(1));

  std::vector<Rat> thetas = {Rat(1, 5), Rat(1, 2)};
  std::vector<Rat> v = v_of_gamma<Rat>(thetas, gamma, Rat(1, 2));
  CHECK(v[0] == Rat(4, 5));
  CHECK(v[1] == Rat(7, 11));
  CHECK_THROWS_AS(v_of_gamma<Rat>(thetas, Rat(1, 4), Rat(1, 2)), Error);
}

TEST_CASE("lowest type's bound equals 1 - theta_1 (multiplier cancellation)") {
  std::uint64_t rng = 42;
  for (int i = 0; i < 1000; ++i) {
    // random rationals theta_1, gamma* in (0,1)
    long long a = 1 + static_cast<long long>(splitmix64(rng) % 998);
    long long b = 1 + static_cast<long long>(splitmix64(rng) % 998);
    Rat th1(a, 1000), gs(b, 1000);
    CHECK(v_star(th1, th1, gs) == 1 - th1);
  }
}

TEST_CASE("small theta_1 makes every bound approach the commitment payoff") {
  Rat th1(1, 1000);
  std::vector<Rat> thetas = {th1, Rat(1, 4), Rat(2, 5), Rat(3, 5), Rat(4, 5)};
  Rat gs(1, 2);
  for (const Rat& th : thetas) {
    double gap =
        to_double(stackelberg_payoff(th, gs) - v_star(th, th1, gs));
    CHECK(gap >= 0.0);
    CHECK(gap <= 2e-3);
  }
}

TEST_CASE("v_star domain checks") {
  CHECK_THROWS_AS(v_star(Rat(1, 5), Rat(1, 2), Rat(1, 2)), Error);  // order
  CHECK_THROWS_AS(v_star(Rat(1, 2), Rat(1, 5), Rat(0)), Error);
  CHECK_THROWS_AS(v_star(Rat(1, 2), Rat(1, 5), Rat(1)), Error);
}

TEST_CASE("capital taxation bound") {
  CHECK(capital_taxation_vstar(Rat(1, 2), Rat(1, 5), Rat(1, 2)) == Rat(25, 22));
  CHECK(capital_taxation_vstar(Rat(1, 5), Rat(1, 5), Rat(1, 2)) == Rat(1));
  CHECK_THROWS_AS(capital_taxation_vstar(Rat(1, 5), Rat(1, 2), Rat(1, 2)),
                  Error);
}

TEST_CASE("GameSpec validation") {
  GameSpec g;
  g.b = 1;
  g.c = 1;
  g.thetas = {Rat(1, 5), Rat(1, 2)};
  g.prior = {Rat(9, 10), Rat(1, 10)};
  g.delta = Rat(99, 100);
  g.gamma = Rat(3, 5);
  CHECK_NOTHROW(g.validate());
  CHECK(g.gstar() == Rat(1, 2));

  GameSpec bad = g;
  bad.prior = {Rat(9, 10), Rat(2, 10)};
  CHECK_THROWS_WITH(bad.validate(), Catch::Matchers::ContainsSubstring(
                                        "prior must sum to 1"));
  bad = g;
  bad.thetas = {Rat(1, 2), Rat(1, 5)};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = g;
  bad.gamma = Rat(1, 3);  // below gamma*
  CHECK_THROWS_WITH(bad.validate(), Catch::Matchers::ContainsSubstring(
                                        "strictly between"));
}

TEST_CASE("assumption checks on the standard tables") {
  std::vector<Rat> thetas = {Rat(1, 5), Rat(1, 2)};
  std::vector<Rat> d = {Rat(0), Rat(0)};
  for (const GeneralGame& g :
       {encode_trust_simultaneous(thetas, Rat(1), Rat(1), d),
        encode_limit_pricing(thetas, Rat(1), Rat(1), d)}) {
    AssumptionReport rep = check_assumptions(g);
    CHECK(rep.a1_ok);
    CHECK(rep.a2_ok);
    CHECK(rep.a3_ok);
    CHECK(rep.br2[0] == 0);   // trusting action best against the top a1
    CHECK(rep.br2[1] == 1);   // distrust best against the bottom a1
    CHECK(rep.stackelberg_a1[0] == 0);
  }
  // Capital taxation reverses the sign of theta (a benefit, not a cost), so
  // the ordering conditions hold only in the forms the LP relies on.
  AssumptionReport rep =
      check_assumptions(encode_capital_taxation(thetas, Rat(1), Rat(1)));
  CHECK(rep.a1_ok);
  CHECK(rep.a3_ok);
  CHECK(rep.stackelberg_a1[0] == 0);
}
