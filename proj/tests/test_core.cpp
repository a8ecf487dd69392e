#include <doctest.h>

#include "histprep/core/errors.hpp"
#include "histprep/core/random.hpp"
#include "histprep/core/series.hpp"
#include "histprep/core/time.hpp"

using namespace histprep;

namespace {

RawSeries make_series(std::initializer_list<std::pair<std::int64_t, double>> pts,
                      const TagId& tag = "T") {
  std::vector<RawSample> samples;
  for (const auto& [t, v] : pts) samples.push_back({Timestamp{t}, v, Quality::Good});
  return RawSeries(tag, std::move(samples));
}

} // namespace

TEST_CASE("iso8601 round trip and offsets") {
  const Timestamp t = parse_iso8601("2021-03-04T12:00:00.000000Z");
  CHECK(format_iso8601(t) == "2021-03-04T12:00:00.000000Z");
  CHECK(parse_iso8601("2021-03-04T13:30:00+01:30") == t);
  CHECK(parse_iso8601("2021-03-04T10:30:00-01:30") == t);
  CHECK(parse_iso8601("2021-03-04 12:00:00Z") == t);
  CHECK(parse_iso8601("2021-03-04T12:00:00.5Z").us == t.us + 500000);

  CHECK(parse_iso8601("1970-01-01T00:00:00Z").us == 0);
  CHECK(parse_iso8601("2100-12-31T23:59:59.999999Z").us > 0);

  CHECK_THROWS_AS(parse_iso8601("2021-03-04T12:00:00"), ParseError); // no offset
  CHECK_THROWS_AS(parse_iso8601("2021-13-04T12:00:00Z"), ParseError);
  CHECK_THROWS_AS(parse_iso8601("2021-02-30T12:00:00Z"), ParseError);
  CHECK_THROWS_AS(parse_iso8601("garbage"), ParseError);
  CHECK_THROWS_AS(parse_iso8601("2021-03-04T12:00:00.1234567Z"), ParseError);

  // leap day
  CHECK(format_iso8601(parse_iso8601("2020-02-29T00:00:00Z")) ==
        "2020-02-29T00:00:00.000000Z");
}

TEST_CASE("duration literals") {
  CHECK(parse_duration("5s").us == 5000000);
  CHECK(parse_duration("1.5h").us == 5400000000LL);
  CHECK(parse_duration("-90s").us == -90000000);
  CHECK(parse_duration("250ms").us == 250000);
  CHECK(parse_duration("3d").us == 3LL * 86400000000LL);
  CHECK_THROWS_AS(parse_duration("5"), ParseError);
  CHECK_THROWS_AS(parse_duration("s"), ParseError);
  CHECK_THROWS_AS(parse_duration("5 s"), ParseError);
  CHECK(format_duration(parse_duration("90s")) == "90s");
  CHECK(format_duration(parse_duration("1.5h")) == "90m");
  CHECK(format_duration(Duration{0}) == "0s");
}

TEST_CASE("RawSeries construction rules") {
  CHECK_THROWS_AS(make_series({{10, 1.0}, {10, 2.0}}), ValidationError);
  CHECK_THROWS_AS(make_series({{10, 1.0}, {5, 2.0}}), ValidationError);

  // non-finite values become Bad-quality missing markers
  std::vector<RawSample> samples{{Timestamp{0}, 1.0, Quality::Good},
                                 {Timestamp{10}, std::nan(""), Quality::Good}};
  const RawSeries s("T", std::move(samples));
  CHECK(!s[1].value.has_value());
  CHECK(s[1].quality == Quality::Bad);
}

TEST_CASE("series_slice basics") {
  const auto s = make_series({{0, 1.0}, {10, 2.0}, {20, 3.0}});

  SUBCASE("slice covering all samples is the identity") {
    const auto r = series_slice(s, Timestamp{0}, Timestamp{21});
    REQUIRE(r.size() == 3);
    CHECK(r[0].t.us == 0);
    CHECK(r[2].t.us == 20);
  }
  SUBCASE("slice of empty series is empty") {
    const RawSeries empty("T", {});
    CHECK(series_slice(empty, Timestamp{0}, Timestamp{10}).empty());
  }
  SUBCASE("half-open upper bound excludes the end point") {
    const auto r = series_slice(s, Timestamp{5}, Timestamp{20});
    REQUIRE(r.size() == 1);
    CHECK(r[0].t.us == 10);
  }
  SUBCASE("invalid window rejected") {
    CHECK_THROWS_AS(series_slice(s, Timestamp{10}, Timestamp{10}), ValidationError);
  }
}

TEST_CASE("slice composition over overlapping windows") {
  rng::Engine eng(7);
  std::vector<RawSample> samples;
  std::int64_t t = 0;
  for (int i = 0; i < 200; ++i) {
    t += 1 + static_cast<std::int64_t>(eng.uniform01() * 20);
    samples.push_back({Timestamp{t}, eng.normal(), Quality::Good});
  }
  const RawSeries s("T", samples);
  for (int trial = 0; trial < 20; ++trial) {
    const std::int64_t a = static_cast<std::int64_t>(eng.uniform01() * t);
    const std::int64_t b = a + 1 + static_cast<std::int64_t>(eng.uniform01() * t);
    const std::int64_t c = static_cast<std::int64_t>(eng.uniform01() * t);
    const std::int64_t d = c + 1 + static_cast<std::int64_t>(eng.uniform01() * t);
    const std::int64_t lo = std::max(a, c);
    const std::int64_t hi = std::min(b, d);
    if (!(lo < hi)) continue;
    const auto nested = series_slice(series_slice(s, Timestamp{a}, Timestamp{b}),
                                     Timestamp{c}, Timestamp{d});
    const auto direct = series_slice(s, Timestamp{lo}, Timestamp{hi});
    REQUIRE(nested.size() == direct.size());
    for (size_t i = 0; i < nested.size(); ++i) CHECK(nested[i].t == direct[i].t);
  }
}

TEST_CASE("apply_segments on raw series") {
  const auto s = make_series({{0, 1.0}, {10, 2.0}, {15, 3.0}, {20, 4.0}});

  SUBCASE("drop with empty list is the identity") {
    const auto r = apply_segments(s, {}, SegmentAction::Drop);
    CHECK(r.size() == 4);
  }
  SUBCASE("keep with a covering segment is the identity") {
    const std::vector<Segment> segs{{Timestamp{0}, Timestamp{21}, SegmentLabel::SteadyState}};
    CHECK(apply_segments(s, segs, SegmentAction::Keep).size() == 4);
  }
  SUBCASE("drop [10,20) removes interior samples, keeps the half-open end") {
    const std::vector<Segment> segs{{Timestamp{10}, Timestamp{20}, SegmentLabel::Shutdown}};
    const auto r = apply_segments(s, segs, SegmentAction::Drop);
    REQUIRE(r.size() == 2);
    CHECK(r[0].t.us == 0);
    CHECK(r[1].t.us == 20);
  }
  SUBCASE("overlapping segments rejected") {
    const std::vector<Segment> segs{
        {Timestamp{0}, Timestamp{12}, SegmentLabel::Shutdown},
        {Timestamp{10}, Timestamp{20}, SegmentLabel::Shutdown}};
    CHECK_THROWS_AS(apply_segments(s, segs, SegmentAction::Drop), ValidationError);
  }
}

TEST_CASE("keep and drop partition the sample set exactly") {
  rng::Engine eng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RawSample> samples;
    std::int64_t t = 0;
    for (int i = 0; i < 100; ++i) {
      t += 1 + static_cast<std::int64_t>(eng.uniform01() * 10);
      samples.push_back({Timestamp{t}, eng.normal(), Quality::Good});
    }
    const RawSeries s("T", samples);
    std::vector<Segment> segs;
    std::int64_t cursor = 0;
    while (true) {
      const std::int64_t a = cursor + 1 + static_cast<std::int64_t>(eng.uniform01() * 100);
      const std::int64_t b = a + 1 + static_cast<std::int64_t>(eng.uniform01() * 200);
      if (b >= t) break;
      segs.push_back({Timestamp{a}, Timestamp{b}, SegmentLabel::Transient});
      cursor = b;
    }
    const auto kept = apply_segments(s, segs, SegmentAction::Keep);
    const auto dropped = apply_segments(s, segs, SegmentAction::Drop);
    CHECK(kept.size() + dropped.size() == s.size());
    // no sample in both
    size_t ik = 0, id = 0;
    for (const auto& smp : s.samples()) {
      const bool in_kept = ik < kept.size() && kept[ik].t == smp.t;
      const bool in_dropped = id < dropped.size() && dropped[id].t == smp.t;
      CHECK(in_kept != in_dropped);
      if (in_kept) ++ik;
      if (in_dropped) ++id;
    }
  }
}

TEST_CASE("gridded apply_segments blanks slots in place") {
  GriddedSeries g("T", Timestamp{0}, Duration{10}, {1.0, 2.0, 3.0, 4.0});
  const std::vector<Segment> segs{{Timestamp{10}, Timestamp{30}, SegmentLabel::Shutdown}};
  const auto dropped = apply_segments(g, segs, SegmentAction::Drop);
  CHECK(dropped[0].has_value());
  CHECK(!dropped[1].has_value());
  CHECK(!dropped[2].has_value());
  CHECK(dropped[3].has_value());
  const auto kept = apply_segments(g, segs, SegmentAction::Keep);
  CHECK(!kept[0].has_value());
  CHECK(kept[1].has_value());
  CHECK(kept[2].has_value());
  CHECK(!kept[3].has_value());
}

TEST_CASE("LabEvent invariants") {
  LabEvent ev;
  ev.sample_time = Timestamp{100};
  ev.result_time = Timestamp{200};
  ev.sample_offset = Duration{50};
  CHECK_NOTHROW(ev.validate());
  ev.sample_offset = Duration{150}; // effective sample time passes the result
  CHECK_THROWS_AS(ev.validate(), ValidationError);
  ev.sample_offset = Duration{0};
  ev.result_time = Timestamp{100};
  CHECK_THROWS_AS(ev.validate(), ValidationError);
}

TEST_CASE("GriddedSeries invariants") {
  CHECK_THROWS_AS(GriddedSeries("T", Timestamp{0}, Duration{0}, {1.0}), ValidationError);
  CHECK_THROWS_AS(GriddedSeries("T", Timestamp{0}, Duration{10}, {}), ValidationError);
  const GriddedSeries g("T", Timestamp{0}, Duration{10}, {1.0, std::nullopt, 3.0});
  CHECK(g.time_at(2).us == 20);
  CHECK(g.present_count() == 2);
  CHECK(g.index_of(Timestamp{15}) == 1);
  CHECK(!g.index_of(Timestamp{30}).has_value());
}

TEST_CASE("segment label round trip") {
  Segment s{Timestamp{0}, Timestamp{1}, SegmentLabel::Mode, 3, std::nullopt};
  CHECK(segment_label_string(s) == "mode:3");
  const auto [label, mode] = segment_label_from_string("mode:3");
  CHECK(label == SegmentLabel::Mode);
  CHECK(mode == 3);
  CHECK(segment_label_from_string("steady_state").first == SegmentLabel::SteadyState);
}
