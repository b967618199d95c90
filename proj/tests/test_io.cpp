#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"
#include "sparsevar/io.hpp"
#include "sparsevar/reference_models.hpp"
#include "sparsevar/report.hpp"

using namespace sparsevar;

namespace {

VarModel parse_model_text(const std::string& text) {
    std::istringstream in(text);
    return io::parse_model(in);
}

template <class F>
void expect_parse_error_at(F&& f, int line, int column) {
    try {
        f();
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), line) << e.what();
        EXPECT_EQ(e.column(), column) << e.what();
    }
}

} // namespace

TEST(ModelFile, ParsesSectionsAndComments) {
    const VarModel m = parse_model_text(
        "# two lags\n"
        "[A1]\n0.5 0\n0 0.5  # diagonal\n"
        "[A2]\n0.1 0\n0 0.1\n"
        "[sigma]\n1 0.2\n0.2 1\n");
    EXPECT_EQ(m.d(), 2);
    EXPECT_EQ(m.p(), 2);
    EXPECT_EQ(m.coeff(1)(1, 1), 0.1);
    EXPECT_EQ(m.sigma_eps()(0, 1), 0.2);
}

TEST(ModelFile, RoundTripsFixtures) {
    for (const char* name : {"example1.model", "example2.model", "example1_null.model"}) {
        const VarModel m = io::read_model(std::string(SPARSEVAR_DATA_DIR) + "/" + name);
        std::ostringstream out;
        io::write_model(out, m);
        const VarModel back = parse_model_text(out.str());
        EXPECT_EQ(back.coeff(0), m.coeff(0));
        EXPECT_EQ(back.sigma_eps(), m.sigma_eps());
    }
    EXPECT_EQ(io::read_model(std::string(SPARSEVAR_DATA_DIR) + "/example1.model").coeff(0),
              reference::example1_coefficients());
    EXPECT_EQ(io::read_model(std::string(SPARSEVAR_DATA_DIR) + "/example2.model").sigma_eps(), reference::example2_sigma());
}

TEST(ModelFile, ErrorsCarryPositions) {
    expect_parse_error_at([] { parse_model_text("[A1]\n1 x\n[SIGMA]\n1\n"); }, 2, 3);
    expect_parse_error_at([] { parse_model_text("1 2\n"); }, 1, 1);
    expect_parse_error_at([] { parse_model_text("[B1]\n"); }, 1, 2);
    expect_parse_error_at([] { parse_model_text("[A1\n"); }, 1, 1);
    expect_parse_error_at([] { parse_model_text("[A1]\n1 0\n0 1 2\n[SIGMA]\n1 0\n0 1\n"); }, 3, 1);
    EXPECT_THROW(parse_model_text("[A1]\n1\n"), ParseError);                       // no SIGMA
    EXPECT_THROW(parse_model_text("[SIGMA]\n1\n"), ParseError);                    // no A1
    EXPECT_THROW(parse_model_text("[A1]\n0\n[A3]\n0\n[SIGMA]\n1\n"), ParseError);  // gap
    EXPECT_THROW(parse_model_text("[A1]\n0\n[A1]\n0\n[SIGMA]\n1\n"), ParseError);  // duplicate
    EXPECT_THROW(parse_model_text("[A1]\nnan\n[SIGMA]\n1\n"), ParseError);
    EXPECT_THROW(parse_model_text("[A1]\n0 0\n0 0\n[SIGMA]\n1\n"), InvalidModelError);
    EXPECT_THROW(io::read_model("/nonexistent/model"), ArgumentError);
}

TEST(Csv, RoundTripIsBitIdentical) {
    const TimeSeries ts = simulate(reference::example1(), 50, 3);
    std::ostringstream first;
    io::write_csv(first, ts);
    std::istringstream in(first.str());
    const TimeSeries back = io::parse_csv(in);
    EXPECT_EQ(back.data(), ts.data());
    std::ostringstream second;
    io::write_csv(second, back);
    EXPECT_EQ(first.str(), second.str());
    EXPECT_EQ(first.str().substr(0, 30), "var1,var2,var3,var4,var5,var6\n");
}

TEST(Csv, RoundTripProperty) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        MatrixXd x = testutil::random_matrix(1 + trial % 7, 1 + trial % 4, rng, std::pow(10.0, trial % 9 - 4));
        x(0, 0) = trial % 3 == 0 ? -0.0 : x(0, 0);
        std::ostringstream out;
        io::write_csv(out, TimeSeries(x));
        std::istringstream in(out.str());
        EXPECT_EQ(io::parse_csv(in).data(), x);
    }
}

TEST(Csv, Errors) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return io::parse_csv(in);
    };
    expect_parse_error_at([&] { parse("a,b\n1,2\n3,abc\n"); }, 3, 3);
    expect_parse_error_at([&] { parse("a,b\n1,2,3\n"); }, 2, 1);
    expect_parse_error_at([&] { parse("a,b\n1,\n"); }, 2, 3);
    EXPECT_THROW(parse(""), ParseError);
    EXPECT_THROW(parse("a,b\n1,inf\n"), ParseError);
    EXPECT_EQ(parse("a,b\r\n1,2\r\n\r\n3,4\r\n").n(), 2);
    EXPECT_THROW(io::read_csv("/nonexistent.csv"), ArgumentError);
}

TEST(GroupFile, ParsesAndNormalizes) {
    std::istringstream in("# comment\nA 6 1\nA 6 2 1\ns 6 1\n\nS 2 3\n");
    GroupSpec g = io::parse_group(in);
    ASSERT_EQ(g.g_a.size(), 2u);
    EXPECT_EQ(g.g_a[0], (CoefIndex{5, 0, 0}));
    ASSERT_EQ(g.g_sigma.size(), 2u);
    EXPECT_EQ(g.g_sigma[0], (SigmaIndex{0, 5}));
    g.normalize(1, 6);
}

TEST(GroupFile, FixturesMatchReference) {
    GroupSpec g1 = io::read_group(std::string(SPARSEVAR_DATA_DIR) + "/example1.group");
    GroupSpec r1 = reference::example1_group();
    g1.normalize(1, 6);
    r1.normalize(1, 6);
    EXPECT_EQ(g1.g_a, r1.g_a);
    EXPECT_EQ(g1.g_sigma, r1.g_sigma);
    GroupSpec g2 = io::read_group(std::string(SPARSEVAR_DATA_DIR) + "/example2.group");
    g2.normalize(1, 20);
    EXPECT_EQ(g2.size(), 84u);
    std::ostringstream out;
    io::write_group(out, g2);
    std::istringstream in(out.str());
    GroupSpec back = io::parse_group(in);
    back.normalize(1, 20);
    EXPECT_EQ(back.g_a, g2.g_a);
}

TEST(GroupFile, Errors) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return io::parse_group(in);
    };
    expect_parse_error_at([&] { parse("A 1\n"); }, 1, 1);
    expect_parse_error_at([&] { parse("A 1 x\n"); }, 1, 5);
    expect_parse_error_at([&] { parse("\nS 2 2\n"); }, 2, 3);
    expect_parse_error_at([&] { parse("B 1 2\n"); }, 1, 1);
    EXPECT_THROW(parse("S 1 2 3\n"), ParseError);
    EXPECT_EQ(parse("# nothing\n").size(), 0u);
}

TEST(Report, RecordsAreSchemaValid) {
    DesparsifiedFit fit;
    fit.n = 100;
    fit.a_de = {MatrixXd::Constant(1, 1, 0.5)};
    fit.a_init = {MatrixXd::Constant(1, 1, 0.4)};
    fit.se_hat = {MatrixXd::Constant(1, 1, 1.5)};
    const auto est = report::estimate_record(fit, {0, 0, 0});
    EXPECT_TRUE(report::valid_record(est));
    EXPECT_EQ(est["schema"], "sparsevar-report/1");
    EXPECT_EQ(est["eq"], 1);
    EXPECT_EQ(est["lag"], 1);
    // Round trip through text.
    const auto parsed = report::json::parse(est.dump());
    EXPECT_EQ(parsed, est);
    EXPECT_EQ(parsed["estimate"].get<double>(), 0.5);

    ConfidenceInterval ci;
    ci.lower = -1.0;
    ci.upper = 2.0;
    EXPECT_TRUE(report::valid_record(report::ci_record(ci, "bootstrap", 500, 0)));
    ci.upper = std::numeric_limits<double>::infinity();
    EXPECT_THROW(report::ci_record(ci, "bootstrap", 500, 0), NumericError);

    report::json bogus = est;
    bogus["schema"] = "other/2";
    EXPECT_FALSE(report::valid_record(bogus));
    bogus = est;
    bogus["type"] = "mystery";
    EXPECT_FALSE(report::valid_record(bogus));
}

TEST(Report, TestRecordListsContributions) {
    TestResult r;
    r.t_obs = 3.0;
    r.crit = 2.5;
    r.p_value = 0.01;
    r.reject = true;
    r.per_target = {1.0, 3.0};
    r.argmax = 1;
    r.B = 199;
    GroupSpec g;
    g.g_a = {{5, 0, 0}};
    g.g_sigma = {{0, 5}};
    const auto j = report::test_record(r, g, 0.05);
    EXPECT_TRUE(report::valid_record(j));
    EXPECT_EQ(j["per_target"].size(), 2u);
    EXPECT_EQ(j["argmax"]["kind"], "S");
    EXPECT_EQ(j["argmax"]["j"], 6);
}
