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

#include <cmath>
#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"
#include "flagtune/flagspace.hpp"
#include "flagtune/random.hpp"
#include "unit/helpers.hpp"

using namespace flagtune;

namespace {

const char* kDump = R"([Global flags]
     bool UseG1GC                                  := true                                {product}
    uintx InitiatingHeapOccupancyPercent            = 45                                  {product}
     intx CICompilerCount                          := 3                                   {product}
   double SweeperThreshold                          = 0.5                                 {product}
    ccstr ErrorFile                                 =                                     {product}
ccstrlist OnError                                   =                                     {product}
     bool UseParallelGC                             = false                               {product}
    uintx ParallelGCThreads                         = 0                                   {product}
     intx ThreadPriorityPolicy                      = -4                                  {product}
this line is not a flag
    uintx G1HeapRegionSize                          = 1048576                             {product}
)";

FlagSpace mixed_space() {
  return FlagSpace({FlagSpec::boolean("UseG1GC", true),
                    FlagSpec::integer("InitiatingHeapOccupancyPercent", 0, 100, 45, "G1GC"),
                    FlagSpec::continuous("SweeperThreshold", 0.0, 2.0, 0.5),
                    FlagSpec::categorical("Mode", {"fast", "slow", "balanced"}, "slow"),
                    FlagSpec::integer("ParallelGCThreads", 0, 16, 4, "ParallelGC")});
}

Configuration random_config(const FlagSpace& space, Rng& rng) {
  Configuration c;
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    const auto& f = space.active_flag(d);
    switch (f.kind) {
      case FlagKind::boolean:
        c.set(f.name, (rng() & 1) != 0);
        break;
      case FlagKind::integer:
        c.set(f.name, f.int_lower + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(f.int_upper - f.int_lower + 1)));
        break;
      case FlagKind::continuous:
        c.set(f.name, f.lower + (f.upper - f.lower) * uniform01(rng));
        break;
      case FlagKind::categorical:
        c.set(f.name, f.choices[rng() % f.choices.size()]);
        break;
    }
  }
  return c;
}

}  // namespace

TEST_SUITE("flagspace") {
  TEST_CASE("dump line for an unsigned flag becomes an integer with a doubled range") {
    const auto parsed = parse_flag_dump("uintx InitiatingHeapOccupancyPercent = 45 {product}");
    REQUIRE(parsed.space.flags().size() == 1);
    const auto& f = parsed.space.flags()[0];
    CHECK(f.name == "InitiatingHeapOccupancyPercent");
    CHECK(f.kind == FlagKind::integer);
    CHECK(std::get<std::int64_t>(f.default_value) == 45);
    CHECK(f.int_lower == 0);
    CHECK(f.int_upper == 90);
    CHECK(f.group == "common");
  }

  TEST_CASE("dump line for a bool with := keeps the dumped default") {
    const auto parsed = parse_flag_dump("bool UseG1GC := true {product}");
    const auto& f = parsed.space.flags().at(0);
    CHECK(f.kind == FlagKind::boolean);
    CHECK(std::get<bool>(f.default_value));
  }

  TEST_CASE("empty dump is an error") {
    try {
      parse_flag_dump("");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
      CHECK(std::string(e.what()) == "no flags parsed");
    }
  }

  TEST_CASE("full dump: string flags dropped, malformed lines counted, ranges follow the default") {
    const auto parsed = parse_flag_dump(kDump, {{"G1", "G1GC"}, {"Parallel", "ParallelGC"}});
    const auto& s = parsed.space;
    CHECK(parsed.skipped_lines == 1);
    CHECK(s.flags().size() == 8);
    CHECK(s.find("ErrorFile") == nullptr);
    CHECK(s.find("OnError") == nullptr);
    CHECK(s.find("UseG1GC")->group == "G1GC");
    CHECK(s.find("InitiatingHeapOccupancyPercent")->group == "common");
    CHECK(s.find("ParallelGCThreads")->group == "ParallelGC");
    const auto* zero = s.find("ParallelGCThreads");
    CHECK(zero->int_lower == 0);
    CHECK(zero->int_upper == 1);
    const auto* neg = s.find("ThreadPriorityPolicy");
    CHECK(neg->int_lower == -8);
    CHECK(neg->int_upper == 0);
    const auto* dbl = s.find("SweeperThreshold");
    CHECK(dbl->kind == FlagKind::continuous);
    CHECK(dbl->upper == 1.0);
    CHECK(s.find("G1HeapRegionSize")->int_upper == 2097152);
  }

  TEST_CASE("parse is idempotent on its own serialization") {
    const auto first = parse_flag_dump(kDump, {{"G1", "G1GC"}}).space;
    const auto text = serialize_flag_dump(first);
    const auto second = parse_flag_dump(text, {{"G1", "G1GC"}}).space;
    CHECK(second.active_names() == first.active_names());
    for (const auto& f : first.flags()) {
      const auto* g = second.find(f.name);
      REQUIRE(g != nullptr);
      CHECK(g->kind == f.kind);
      CHECK(g->default_value == f.default_value);
    }
    CHECK(serialize_flag_dump(second) == text);
  }

  TEST_CASE("encode examples") {
    const FlagSpace bool_space({FlagSpec::boolean("UseG1GC", false)});
    CHECK(encode(bool_space, {{"UseG1GC", true}}) == std::vector<double>{1.0});
    const FlagSpace int_space({FlagSpec::integer("IHOP", 0, 100, 10)});
    CHECK(encode(int_space, {{"IHOP", std::int64_t{45}}})[0] == doctest::Approx(0.45).epsilon(1e-15));
    const FlagSpace cat_space({FlagSpec::categorical("Only", {"x"}, "x")});
    CHECK(encode(cat_space, {{"Only", std::string("x")}})[0] == 0.0);
  }

  TEST_CASE("encode rejects out-of-range values by flag name") {
    const FlagSpace space({FlagSpec::integer("IHOP", 0, 100, 10)});
    try {
      encode(space, {{"IHOP", std::int64_t{101}}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("IHOP") != std::string::npos);
    }
  }

  TEST_CASE("decode examples") {
    const auto space = mixed_space();
    const auto lows = decode(space, std::vector<double>(space.dimension(), 0.0));
    CHECK(std::get<bool>(lows.at("UseG1GC")) == false);
    CHECK(std::get<std::int64_t>(lows.at("InitiatingHeapOccupancyPercent")) == 0);
    CHECK(std::get<double>(lows.at("SweeperThreshold")) == 0.0);
    CHECK(std::get<std::string>(lows.at("Mode")) == "fast");

    const FlagSpace ten({FlagSpec::integer("N", 0, 10, 5)});
    CHECK(std::get<std::int64_t>(decode(ten, std::vector<double>{0.449}).at("N")) == 4);
    CHECK(std::get<std::int64_t>(decode(ten, std::vector<double>{0.451}).at("N")) == 5);
  }

  TEST_CASE("decode rejects bad vectors") {
    const FlagSpace ten({FlagSpec::integer("N", 0, 10, 5)});
    CHECK_THROWS_AS(decode(ten, std::vector<double>{0.1, 0.2}), Error);
    CHECK_THROWS_AS(decode(ten, std::vector<double>{1.5}), Error);
    CHECK_THROWS_AS(decode(ten, std::vector<double>{-0.1}), Error);
  }

  TEST_CASE("property: roundtrip and encode image over random configurations") {
    const auto space = mixed_space();
    Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
      const auto c = random_config(space, rng);
      const auto v = encode(space, c);
      for (double u : v) {
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
      }
      const auto back = decode(space, v);
      for (const auto& [name, value] : c) {
        const auto& got = back.at(name);
        if (const auto* d = std::get_if<double>(&value)) {
          CHECK(std::get<double>(got) == doctest::Approx(*d).epsilon(1e-12));
        } else {
          CHECK(got == value);
        }
      }
    }
  }

  TEST_CASE("property: encode(decode(v)) moves only integer and categorical coordinates") {
    const auto space = mixed_space();
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const auto v = testing::random_point(rng, space.dimension());
      const auto w = encode(space, decode(space, v));
      for (std::size_t d = 0; d < v.size(); ++d) {
        const auto kind = space.active_flag(d).kind;
        if (kind == FlagKind::continuous) CHECK(w[d] == doctest::Approx(v[d]).epsilon(1e-12));
        if (kind == FlagKind::integer) {
          const auto& f = space.active_flag(d);
          CHECK(std::abs(w[d] - v[d]) <= 0.5 / static_cast<double>(f.int_upper - f.int_lower) + 1e-12);
        }
      }
    }
  }

  TEST_CASE("render examples") {
    const FlagSpace space({FlagSpec::boolean("UseG1GC", false), FlagSpec::integer("InitiatingHeapOccupancyPercent", 0, 90, 45)});
    CHECK(render_cli_args(space, {{"UseG1GC", true}}) == std::vector<std::string>{"-XX:+UseG1GC"});
    CHECK(render_cli_args(space, {{"UseG1GC", false}}) == std::vector<std::string>{"-XX:-UseG1GC"});
    CHECK(render_cli_args(space, {{"InitiatingHeapOccupancyPercent", std::int64_t{45}}}) ==
          std::vector<std::string>{"-XX:InitiatingHeapOccupancyPercent=45"});
    CHECK(render_cli_args(space, Configuration{}).empty());
  }

  TEST_CASE("render gnu style and one argument per active flag in order") {
    auto gnu = FlagSpec::continuous("ratio", 0.0, 1.0, 0.25);
    gnu.render_style = RenderStyle::gnu;
    const FlagSpace space({FlagSpec::boolean("B", true), gnu, FlagSpec::categorical("Mode", {"a", "b"}, "b")});
    const auto args = render_cli_args(space, space.defaults());
    CHECK(args == std::vector<std::string>{"-XX:+B", "--ratio=0.25", "-XX:Mode=b"});
  }

  TEST_CASE("group activation sets the encoding dimension") {
    const auto space = mixed_space();
    CHECK(space.dimension() == 5);
    const auto g1 = space.with_active_groups(std::set<std::string>{"G1GC"});
    CHECK(g1.dimension() == 4);
    CHECK_FALSE(g1.dimension_of("ParallelGCThreads").has_value());
    CHECK(g1.active_names() ==
          std::vector<std::string>{"UseG1GC", "InitiatingHeapOccupancyPercent", "SweeperThreshold", "Mode"});
    CHECK(g1.defaults().size() == 4);
  }

  TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(FlagSpec::integer("X", 5, 1, 3).validate(), Error);
    CHECK_THROWS_AS(FlagSpec::continuous("X", 1.0, 1.0, 1.0).validate(), Error);
    CHECK_THROWS_AS(FlagSpec::continuous("X", 0.0, 1.0, 2.0).validate(), Error);
    CHECK_THROWS_AS(FlagSpec::categorical("X", {"a"}, "b").validate(), Error);
    CHECK_THROWS_AS(FlagSpace({FlagSpec::boolean("A", true), FlagSpec::boolean("A", false)}), Error);
  }

  TEST_CASE("restricted_to keeps space order and the fingerprint tracks the active list") {
    const auto space = mixed_space();
    const std::vector<std::string> names{"Mode", "UseG1GC"};
    const auto sub = space.restricted_to(names);
    CHECK(sub.active_names() == std::vector<std::string>{"UseG1GC", "Mode"});
    CHECK(sub.fingerprint() != space.fingerprint());
    CHECK(space.fingerprint() == mixed_space().fingerprint());
  }

  TEST_CASE("json roundtrip of a flag space") {
    const auto space = mixed_space().with_active_groups(std::set<std::string>{"G1GC"});
    const auto back = flag_space_from_json(flag_space_to_json(space));
    CHECK(back == space);
  }
}
