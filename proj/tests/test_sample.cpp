#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "deepratio/sample.hpp"
#include "deepratio/sample_io.hpp"
#include "deepratio/sim_core.hpp"

using namespace deepratio;
namespace fs = std::filesystem;

namespace {

MarkedPointSample tiny_sample() {
    MarkedPointSample s;
    s.source = "hand";
    s.horizon = 4.0;
    s.events = {{0.5, 0, 1, {0.1, 0.2}, {0.3}}, {1.5, 3, 0, {-0.1, 0.0}, {1.0}}, {3.25, 2, 1, {0.0, 0.7}, {-2.0}}};
    return s;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("deepratio_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(ClassIndex, EncodeDecodeIsABijection) {
    std::set<int> seen;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 2; ++k) {
            const int c = encode_class(i, k);
            EXPECT_EQ(c, 2 * i + k);
            EXPECT_EQ(decode_class(c), (ClassPair{i, k}));
            seen.insert(c);
        }
    EXPECT_EQ(seen, (std::set<int>{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(Sample, ClassCountsAndFeatures) {
    const auto s = tiny_sample();
    const auto counts = s.class_counts();
    ASSERT_EQ(counts.size(), 8u);
    EXPECT_EQ(counts[1], 1u);
    EXPECT_EQ(counts[6], 1u);
    EXPECT_EQ(counts[5], 1u);
    EXPECT_EQ(joint_features(s.events[0]), (std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_EQ(mark_features(s.events[1]).size(), 1u);
    EXPECT_EQ(mark_features(s.events[1])[0], 1.0);
}

TEST(Sample, MarkFeaturesFallBackToX) {
    EventRecord ev{1.0, 1, 0, {0.5, -1.0, 2.0}, {}};
    const auto f = mark_features(ev);
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f[2], 2.0);
}

TEST(Sample, ValidateRejectsBadStreams) {
    EXPECT_NO_THROW(validate(tiny_sample()));

    auto s = tiny_sample();
    s.events[1].time = 0.5;
    EXPECT_THROW(validate(s), std::invalid_argument);
    EXPECT_NO_THROW(validate(s, false));

    s = tiny_sample();
    s.events[2].time = 4.5;
    EXPECT_THROW(validate(s), std::invalid_argument);

    s = tiny_sample();
    s.events[0].time = 0.0;
    EXPECT_THROW(validate(s), std::invalid_argument);

    s = tiny_sample();
    s.events[0].type = 4;
    EXPECT_THROW(validate(s), std::invalid_argument);

    s = tiny_sample();
    s.events[0].mark = 2;
    EXPECT_THROW(validate(s), std::invalid_argument);

    s = tiny_sample();
    s.events[0].x.pop_back();
    EXPECT_THROW(validate(s), std::invalid_argument);
}

TEST(SampleIo, RoundTripIsValueExact) {
    const auto dir = scratch("sample_io");
    const auto s = sim::simulate(sim::paper_model(), 50.0, 9);
    io::save_sample(s, dir / "run");
    ASSERT_TRUE(fs::exists(dir / "run.csv"));
    ASSERT_TRUE(fs::exists(dir / "run.json"));
    ASSERT_TRUE(fs::exists(dir / "run_grid.csv"));

    std::ifstream in(dir / "run.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "time,type,mark,x0,x1,y");

    const auto back = io::load_sample(dir / "run");
    EXPECT_EQ(back.horizon, s.horizon);
    EXPECT_EQ(back.seed, s.seed);
    EXPECT_EQ(back.d_x, s.d_x);
    EXPECT_EQ(back.d_y, s.d_y);
    ASSERT_EQ(back.events.size(), s.events.size());
    for (std::size_t n = 0; n < s.events.size(); ++n) {
        EXPECT_EQ(back.events[n].time, s.events[n].time);
        EXPECT_EQ(back.events[n].type, s.events[n].type);
        EXPECT_EQ(back.events[n].mark, s.events[n].mark);
        EXPECT_EQ(back.events[n].x, s.events[n].x);
        EXPECT_EQ(back.events[n].y, s.events[n].y);
    }
    EXPECT_EQ(back.covariate_grid.values, s.covariate_grid.values);
}

TEST(SampleIo, MissingFileThrows) {
    EXPECT_ANY_THROW(io::load_sample(fs::temp_directory_path() / "deepratio_no_such_sample"));
}
