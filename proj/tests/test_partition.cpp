#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kometo/partition.hpp"

#include <stdexcept>
#include <vector>

using namespace kometo;

TEST_CASE("interval splits tile the parent exactly") {
  auto halves = split_interval({0.0, 1.0}, 2);
  REQUIRE(halves.size() == 2);
  CHECK(halves[0].lo == 0.0);
  CHECK(halves[0].hi == 0.5);
  CHECK(halves[1].lo == 0.5);
  CHECK(halves[1].hi == 1.0);

  auto thirds = split_interval({0.0, 1.0}, 3);
  REQUIRE(thirds.size() == 3);
  CHECK(thirds[0].hi == thirds[1].lo);  // shared cut points, no gaps
  CHECK(thirds[1].hi == thirds[2].lo);
  CHECK(thirds[2].hi == 1.0);

  auto shifted = split_interval({-5.0, 10.0}, 2);
  CHECK(shifted[0].hi == 2.5);
}

TEST_CASE("boundary ties resolve to the lower slab") {
  const Interval unit{0.0, 1.0};
  CHECK(child_slot(unit, 2, 0.5) == 0);
  CHECK(child_slot(unit, 2, 0.49) == 0);
  CHECK(child_slot(unit, 2, 0.51) == 1);
  CHECK(child_slot(unit, 2, 0.0) == 0);
  CHECK(child_slot(unit, 2, 1.0) == 1);
  CHECK(child_slot(unit, 4, 0.25) == 0);
  CHECK(child_slot(unit, 4, 0.26) == 1);
}

TEST_CASE("cells recover their bounds from the key") {
  PartitionTree tree(Box::unit(1), 2);
  CHECK(tree.root().bounds.dims[0].lo == 0.0);
  CHECK(tree.root().bounds.dims[0].hi == 1.0);

  auto c23 = tree.cell(CellKey{2, 3});
  CHECK(c23.bounds.dims[0].lo == 0.75);
  CHECK(c23.bounds.dims[0].hi == 1.0);
  CHECK(c23.representative() == Point{0.875});

  auto c37 = tree.cell(CellKey{3, 7});
  CHECK(c37.bounds.dims[0].lo == 0.875);

  CHECK_THROWS_AS(tree.cell(CellKey{-1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(tree.cell(CellKey{2, -1}), std::invalid_argument);
  CHECK_THROWS_AS(tree.cell(CellKey{1, 2}), std::invalid_argument);
}

TEST_CASE("containment walks tie-low") {
  PartitionTree tree(Box::unit(1), 2);
  CHECK(tree.cell_containing({0.99}, 3).key == CellKey{3, 7});
  CHECK(tree.cell_containing({0.5}, 1).key == CellKey{1, 0});
  CHECK(tree.cell_containing({0.25}, 2).key == CellKey{2, 0});
  CHECK(tree.cell_containing({0.0}, 5).key == CellKey{5, 0});
  CHECK_THROWS_AS(tree.cell_containing({1.5}, 1), std::domain_error);
  CHECK_THROWS_AS(tree.cell_containing({0.5}, -1), std::invalid_argument);
}

TEST_CASE("split axis cycles with depth") {
  PartitionTree tree(Box::unit(2), 2);
  CHECK(tree.split_axis(0) == 0);
  CHECK(tree.split_axis(1) == 1);
  CHECK(tree.split_axis(2) == 0);

  auto kids = tree.split(CellKey{0, 0});
  REQUIRE(kids.size() == 2);
  auto left = tree.cell(kids[0]);
  CHECK(left.bounds.dims[0].hi == 0.5);
  CHECK(left.bounds.dims[1].hi == 1.0);  // only axis 0 narrowed at the root

  auto grandkids = tree.split(kids[0]);
  auto lower = tree.cell(grandkids[0]);
  auto upper = tree.cell(grandkids[1]);
  CHECK(lower.bounds.dims[1].hi == 0.5);
  CHECK(upper.bounds.dims[1].lo == 0.5);
  CHECK(upper.representative() == Point{0.25, 0.75});
}

TEST_CASE("records materialize once and count per depth") {
  PartitionTree tree(Box::unit(1), 2);
  CHECK(tree.materialized_count(0) == 1);
  CHECK(tree.materialized_count(1) == 0);
  CHECK(tree.find(CellKey{1, 1}) == nullptr);
  CHECK_THROWS_AS(tree.record(CellKey{1, 1}), std::logic_error);

  tree.ensure(CellKey{1, 1});
  CHECK(tree.materialized_count(1) == 1);
  tree.ensure(CellKey{1, 1});
  CHECK(tree.materialized_count(1) == 1);

  tree.split(CellKey{0, 0});  // (1,1) already exists; only (1,0) is new
  CHECK(tree.materialized_count(1) == 2);
  CHECK(tree.find(CellKey{1, 0}) != nullptr);

  auto at1 = tree.materialized_at(1);
  REQUIRE(at1.size() == 2);
  CHECK(at1[0] == CellKey{1, 0});
  CHECK(at1[1] == CellKey{1, 1});
}

TEST_CASE("requestable flags bump the revision only on fresh flips") {
  PartitionTree tree(Box::unit(1), 2);
  CHECK(tree.flag_revision(1) == 0);

  tree.mark_requestable(CellKey{1, 0}, 2);
  CHECK(tree.flag_revision(1) == 1);
  CHECK(tree.record(CellKey{1, 0}).is_requestable(2));
  CHECK_FALSE(tree.record(CellKey{1, 0}).is_requestable(1));

  tree.mark_requestable(CellKey{1, 0}, 2);  // already set: no new revision
  CHECK(tree.flag_revision(1) == 1);

  tree.mark_requestable(CellKey{1, 0}, 0);
  CHECK(tree.flag_revision(1) == 2);
  CHECK(tree.flag_revision(0) == 0);  // other depths untouched

  CHECK_THROWS_AS(tree.mark_requestable(CellKey{1, 0}, -1),
                  std::invalid_argument);
}

TEST_CASE("values store per level") {
  PartitionTree tree(Box::unit(1), 2);
  CHECK_THROWS_AS(tree.store_value(CellKey{1, 0}, 0, 1.0), std::logic_error);
  CHECK(tree.value(CellKey{1, 0}, 0) == std::nullopt);

  tree.ensure(CellKey{1, 0});
  tree.store_value(CellKey{1, 0}, 0, -0.25);
  tree.store_value(CellKey{1, 0}, 3, -0.125);
  CHECK(tree.value(CellKey{1, 0}, 0) == -0.25);
  CHECK(tree.value(CellKey{1, 0}, 3) == -0.125);
  CHECK(tree.value(CellKey{1, 0}, 1) == std::nullopt);
}

TEST_CASE("parents and representative inheritance") {
  CHECK(parent_of(CellKey{3, 6}, 2) == CellKey{2, 3});
  CHECK(parent_of(CellKey{1, 0}, 2) == CellKey{0, 0});
  CHECK(parent_of(CellKey{2, 7}, 3) == CellKey{1, 2});
  CHECK_THROWS_AS(parent_of(CellKey{0, 0}, 2), std::invalid_argument);

  CHECK(inherits_representative(3, 1));
  CHECK(inherits_representative(5, 2));
  CHECK_FALSE(inherits_representative(3, 0));
  CHECK_FALSE(inherits_representative(3, 2));
  CHECK_FALSE(inherits_representative(2, 0));
  CHECK_FALSE(inherits_representative(2, 1));
}

TEST_CASE("indices exceed machine words deep down") {
  PartitionTree tree(Box::unit(1), 2);
  const CellIndex last = (CellIndex(1) << 200) - 1;
  CHECK(parent_of(CellKey{200, last}, 2).index == (CellIndex(1) << 199) - 1);

  auto deep = tree.cell(CellKey{200, last});
  CHECK(deep.bounds.dims[0].hi == 1.0);  // width underflows toward the edge
  CHECK_THROWS_AS(tree.cell(CellKey{200, CellIndex(1) << 200}),
                  std::invalid_argument);
}
