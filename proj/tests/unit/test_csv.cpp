// Copyright 2026 The flagtune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include "flagtune/csv.hpp"
#include "flagtune/error.hpp"
#include "unit/helpers.hpp"

using namespace flagtune;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invalid_argument;
}

FlagSpace mixed_space() {
  return FlagSpace({FlagSpec::boolean("UseG1GC", false), FlagSpec::integer("MaxTenuringThreshold", 0, 15, 7),
                    FlagSpec::continuous("Ratio", 0.0, 1.0, 0.5),
                    FlagSpec::categorical("Mode", {"a", "b,c"}, "a")});
}

}  // namespace

TEST_SUITE("csv") {
  TEST_CASE("quoted fields, doubled quotes and CRLF") {
    const auto t = parse_csv("a,b,c\r\n1,\"x,y\",\"say \"\"hi\"\"\"\r\n2,,3\r\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == std::vector<std::string>{"1", "x,y", "say \"hi\""});
    CHECK(t.rows[1] == std::vector<std::string>{"2", "", "3"});
    CHECK(t.column("c") == 2);
    CHECK(t.column("zz") == std::string_view::npos);
  }

  TEST_CASE("malformed input is a parse error") {
    CHECK(kind_of([] { parse_csv("a,b\n1\n"); }) == ErrorKind::parse);
    CHECK(kind_of([] { parse_csv("a,b\n\"1,2\n"); }) == ErrorKind::parse);
    CHECK(kind_of([] { parse_csv(""); }) == ErrorKind::parse);
  }

  TEST_CASE("dataset csv writes flags then sorted metrics and skips failed trials") {
    const auto space = mixed_space();
    TrialRecord ok;
    ok.config = space.defaults();
    ok.config.set("Mode", std::string("b,c"));
    ok.metrics = {{"time", 2.5}, {"heap", 40.0}};
    TrialRecord bad = ok;
    bad.status = TrialStatus::timeout;
    const auto csv = dataset_csv(space, {ok, bad});
    CHECK(csv == "UseG1GC,MaxTenuringThreshold,Ratio,Mode,heap,time\nfalse,7,0.5,\"b,c\",40,2.5\n");
  }

  TEST_CASE("property: dataset csv round-trips the encoded points") {
    const auto space = mixed_space();
    Rng rng(5);
    std::vector<TrialRecord> trials;
    Dataset expected;
    for (int i = 0; i < 30; ++i) {
      TrialRecord r;
      r.config = decode(space, testing::random_point(rng, space.dimension()));
      r.metrics["time"] = uniform01(rng) * 10.0;
      expected.add(encode(space, r.config), r.metrics["time"]);
      trials.push_back(std::move(r));
    }
    const auto back = dataset_from_csv(parse_csv(dataset_csv(space, trials)), space, "time");
    CHECK(back.x == expected.x);
    CHECK(back.y == expected.y);
  }

  TEST_CASE("missing columns are reported by name") {
    const auto space = mixed_space();
    const auto table = parse_csv("UseG1GC,MaxTenuringThreshold,Ratio,Mode,time\ntrue,3,0.25,a,1.5\n");
    try {
      dataset_from_csv(table, space, "throughput");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::invalid_argument);
      CHECK(std::string(e.what()).find("metric column 'throughput' not found in dataset") != std::string::npos);
    }
    const auto partial = parse_csv("UseG1GC,Ratio,Mode,time\ntrue,0.25,a,1.5\n");
    CHECK(kind_of([&] { dataset_from_csv(partial, space, "time"); }) == ErrorKind::parse);
    const auto garbage = parse_csv("UseG1GC,MaxTenuringThreshold,Ratio,Mode,time\nmaybe,3,0.25,a,1.5\n");
    CHECK(kind_of([&] { dataset_from_csv(garbage, space, "time"); }) == ErrorKind::parse);
  }

  TEST_CASE("atomic write creates parents and replaces content") {
    testing::TempDir dir("csv");
    const auto path = dir.path() / "a" / "b" / "out.txt";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    CHECK(read_file(path) == "second");
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    CHECK(kind_of([&] { read_file(dir.path() / "missing.txt"); }) == ErrorKind::io);
  }
}
