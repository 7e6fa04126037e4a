#include <doctest.h>

#include <random>

#include "fo2/cells.hpp"
#include "fo2/errors.hpp"
#include "fo2/normalizer.hpp"
#include "support.hpp"

using namespace fo2;

namespace {

CellStructure cells_of(const std::string& text) {
  NormalizedProblem np = normalize(parse_problem(text));
  return CellStructure(np.matrix, np.signature);
}

std::vector<int> upper_table(const CellStructure& c) {
  std::vector<int> out;
  for (int i = 0; i < c.num_types(); ++i)
    for (int j = i; j < c.num_types(); ++j) out.push_back(c.nij(i, j));
  return out;
}

}  // namespace

TEST_CASE("running example table") {
  CellStructure c = cells_of(fo2test::kRunning);
  CHECK(c.u() == 2);
  CHECK(c.b() == 2);
  CHECK(c.unary_slots()[0].pred == "A");
  CHECK(c.unary_slots()[1].pred == "R");
  CHECK(c.unary_slots()[1].reflexive);
  CHECK(upper_table(c) == std::vector<int>{4, 4, 2, 2, 4, 2, 2, 4, 4, 4});
  std::vector<int> row;
  for (int v = 0; v < 4; ++v) row.push_back(c.nijv(1, 3, v));
  CHECK(row == std::vector<int>{1, 0, 1, 0});
  for (int i = 0; i < 4; ++i) CHECK(c.valid_one_type(i));
  CHECK(c.csv().find("1,3,2") != std::string::npos);
}

TEST_CASE("tautology over one binary predicate") {
  CellStructure c = cells_of("predicate R/2\nforall x forall y (R(x,y) | !R(x,y))\n");
  CHECK(c.u() == 1);
  CHECK(c.b() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(c.nij(i, j) == 4);
      for (int v = 0; v < 4; ++v) CHECK(c.nijv(i, j, v));
    }
}

TEST_CASE("invalid 1-types") {
  CellStructure contra =
      cells_of("predicate A/1\nforall x forall y (A(x) & !A(x))\n");
  for (int i = 0; i < contra.num_types(); ++i)
    CHECK_FALSE(contra.valid_one_type(i));
  CHECK(contra.valid_types().empty());

  CellStructure refl = cells_of("predicate R/2\nforall x R(x,x)\n");
  CHECK_FALSE(refl.valid_one_type(0));
  CHECK(refl.valid_one_type(1));
  CHECK(refl.nij(0, 1) == 0);
}

TEST_CASE("slot order") {
  CellStructure c = cells_of(
      "predicate S/2\npredicate B/1\npredicate R/2\npredicate A/1\n"
      "forall x forall y (A(x) | B(y) | R(x,y) | S(y,x))\n");
  std::vector<std::string> unary;
  for (const auto& s : c.unary_slots()) unary.push_back(s.pred);
  CHECK(unary == std::vector<std::string>{"A", "B", "R", "S"});
  CHECK(c.binary_slot("R", false) == 0);
  CHECK(c.binary_slot("R", true) == 1);
  CHECK(c.binary_slot("S", false) == 2);
  CHECK(c.binary_slot("S", true) == 3);
  CHECK(c.unary_slot("S") == 3);
  CHECK(c.binary_slot("A", false) == -1);
}

TEST_CASE("random matrices: symmetry, aggregation and bounds") {
  std::mt19937 rng(5);
  const char* atoms[] = {"A(x)", "A(y)", "B(x)", "B(y)", "R(x,y)",
                         "R(y,x)", "R(x,x)", "R(y,y)", "x = y"};
  std::function<std::string(int)> gen = [&](int d) -> std::string {
    int k = d == 0 ? 0 : rng() % 4;
    if (k == 0) return atoms[rng() % 9];
    if (k == 1) return "!(" + gen(d - 1) + ")";
    const char* ops[] = {" & ", " | ", " <-> "};
    return "(" + gen(d - 1) + ops[rng() % 3] + gen(d - 1) + ")";
  };
  for (int trial = 0; trial < 60; ++trial) {
    std::string m = gen(4);
    CAPTURE(m);
    CellStructure c = cells_of(
        "predicate A/1\npredicate B/1\npredicate R/2\nforall x forall y " + m +
        "\n");
    long long total = 0;
    for (int i = 0; i < c.num_types(); ++i)
      for (int j = 0; j < c.num_types(); ++j) {
        CHECK(c.nij(i, j) == c.nij(j, i));
        int sum = 0;
        std::vector<int> listed;
        c.for_each_table(i, j, [&](int v) { listed.push_back(v); });
        for (int v = 0; v < c.num_tables(); ++v) {
          sum += c.nijv(i, j, v);
          if (c.nijv(i, j, v))
            CHECK(std::find(listed.begin(), listed.end(), v) != listed.end());
        }
        CHECK(sum == c.nij(i, j));
        CHECK(listed.size() == static_cast<std::size_t>(sum));
        total += sum;
      }
    CHECK(total <= (1LL << (2 * c.u() + c.b())));
  }
}

TEST_CASE("renaming predicates permutes the tables consistently") {
  // Swapping the names A and B exchanges the two unary slots.
  CellStructure ab = cells_of(
      "predicate A/1\npredicate B/1\npredicate R/2\n"
      "forall x forall y (A(x) & R(x,y) -> B(y))\n");
  CellStructure ba = cells_of(
      "predicate A/1\npredicate B/1\npredicate R/2\n"
      "forall x forall y (B(x) & R(x,y) -> A(y))\n");
  auto swap_ab = [](int i) {
    int a = (i >> 2) & 1, b = (i >> 1) & 1;
    return (b << 2) | (a << 1) | (i & 1);
  };
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int v = 0; v < 4; ++v)
        CHECK(ab.nijv(i, j, v) == ba.nijv(swap_ab(i), swap_ab(j), v));
}

TEST_CASE("separable matrices") {
  CHECK(cells_of("predicate A/1\npredicate R/2\nforall x (A(x) -> exists y R(x,y))\n")
            .separable());
  CHECK_FALSE(cells_of(fo2test::kRunning).separable());
}
