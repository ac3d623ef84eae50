#include <catch2/catch.hpp>

#include <cstdlib>

#include "support/helpers.hpp"
#include "tritier/config.hpp"

using namespace tritier;

TEST_CASE("config parser handles the documented grammar") {
    const auto cfg = ConfigMap::parse(
        "# comment\n"
        "seed = 42\n"
        "tier1.l_max = 1500\n"
        "models.a.provider = mock\n"
        "models.a.model_name = model-a\n"
        "models.b.provider = mock\n"
        "list.key = one, two , three\n");
    CHECK(cfg.get_int("seed", 0) == 42);
    CHECK(cfg.get_double("tier1.l_max", 0) == 1500);
    CHECK(cfg.get_or("missing", "dflt") == "dflt");
    CHECK(cfg.get_list("list.key") == std::vector<std::string>{"one", "two", "three"});
    CHECK(cfg.subsection_names("models") == std::vector<std::string>{"a", "b"});

    SECTION("duplicate keys are rejected") {
        CHECK_THROWS_AS(ConfigMap::parse("a = 1\na = 2\n"), Error);
    }
    SECTION("non key=value lines are rejected with the line number") {
        try {
            ConfigMap::parse("seed = 1\nbogus line\n");
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SECTION("non-numeric values error when read as numbers") {
        const auto c = ConfigMap::parse("x = abc\n");
        CHECK_THROWS_AS(c.get_int("x", 0), Error);
    }
}

TEST_CASE("canonical config text ignores comments and spacing") {
    const auto a = ConfigMap::parse("# hello\nseed = 1\nkey =  v\n");
    const auto b = ConfigMap::parse("key=v\n\n\nseed=1   \n# other comment\n");
    CHECK(a.canonical_text() == b.canonical_text());
    CHECK(a.digest() == b.digest());
    const auto c = ConfigMap::parse("key=v\nseed=2\n");
    CHECK(a.digest() != c.digest());
}

TEST_CASE("secret keys interpolate ${VAR} from the environment") {
    ::setenv("TRITIER_TEST_SECRET", "resolved-name", 1);
    const auto cfg = ConfigMap::parse(
        "models.a.credentials_ref = ${TRITIER_TEST_SECRET}\n"
        "plain.value = ${TRITIER_TEST_SECRET}\n");
    CHECK(cfg.get_or("models.a.credentials_ref", "") == "resolved-name");
    // non-secret keys are left verbatim
    CHECK(cfg.get_or("plain.value", "") == "${TRITIER_TEST_SECRET}");
    SECTION("missing variable in a secret key errors") {
        ::unsetenv("TRITIER_TEST_SECRET_GONE");
        CHECK_THROWS_AS(
            ConfigMap::parse("judges.j.credentials_ref = ${TRITIER_TEST_SECRET_GONE}\n"), Error);
    }
}

TEST_CASE("load_run_config assembles endpoints and resolves paths") {
    const auto fixture_cfg = testutil::fixtures_dir() / "fixture_config.cfg";
    const RunConfig rc = load_run_config(fixture_cfg);
    CHECK(rc.seed == 42);
    CHECK(rc.transport == TransportMode::mock);
    CHECK(rc.pairs_path.is_absolute());
    CHECK(std::filesystem::exists(rc.pairs_path));
    CHECK(std::filesystem::exists(rc.registry_path));
    REQUIRE(rc.model_names == std::vector<std::string>{"mock-vlm-a", "mock-vlm-b"});
    CHECK(rc.models.at("mock-vlm-a").model_name == "mock-vlm-a");
    CHECK(rc.models.at("mock-vlm-a").credentials_ref == "TRITIER_API_KEY_MOCK");
    CHECK(rc.primary_judge == "mock-judge");
    CHECK(rc.calibration_train == 16);
    CHECK(rc.tier1.l_max == 2000);

    SECTION("missing required keys are named") {
        testutil::TempDir tmp("cfg");
        const auto path = tmp.path() / "bad.cfg";
        testutil::write_file(path, "seed = 1\n");
        try {
            load_run_config(path);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::config);
            CHECK(std::string(e.what()).find("corpus.pairs") != std::string::npos);
        }
    }
    SECTION("unknown transport mode is rejected") {
        testutil::TempDir tmp("cfg2");
        const auto path = tmp.path() / "bad.cfg";
        testutil::write_file(path,
                             "seed = 1\ntransport = carrier-pigeon\ncorpus.pairs = x\nregistry = y\n");
        CHECK_THROWS_AS(load_run_config(path), Error);
    }
}
