#include "haloscan/config.hpp"
#include "haloscan/errors.hpp"

#include <doctest.h>

#include <set>
#include <sstream>
#include <string>

using namespace haloscan;

namespace {

CampaignConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults are documented and resolve") {
    std::set<std::string> seen;
    for (const auto& k : config_schema()) {
        CHECK(std::string(k.doc).size() > 0);
        CHECK(seen.insert(std::string(k.section) + "." + k.key).second);
    }
    const CampaignConfig c = parse("");
    CHECK(c.resolved.size() == config_schema().size());
    CHECK(c.seed == 20200101);
    CHECK(c.setup.receiver.beta == 7.1);
    CHECK(c.plan().steps.size() == 50);
    CHECK(c.hash.size() == 64);
}

TEST_CASE("values are parsed into the setup") {
    const CampaignConfig c = parse(
        "[campaign]\nseed = 7\nskip = 4.1001e9:4.1002e9, 4.102e9:4.103e9\n"
        "[receiver]\nsqueezing = false\n[axion]\ninject = 4.1012e9:2.5\n[output]\nspectrum_encoding = text\n");
    CHECK(c.seed == 7);
    REQUIRE(c.skips.size() == 2);
    CHECK(c.skips[1].hi == 4.103e9);
    CHECK_FALSE(c.setup.squeezing);
    REQUIRE(c.setup.injections.size() == 1);
    CHECK(c.setup.injections[0].g == 2.5);
    CHECK(c.encoding == SpectrumEncoding::text);
}

TEST_CASE("bad input is a config error") {
    CHECK_THROWS_AS(parse("[campaign]\nsede = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[nosuch]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[receiver]\nbeta = seven\n"), ConfigError);
    CHECK_THROWS_AS(parse("[receiver]\nsqueezing = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse("[campaign]\nskip = 4e9\n"), ConfigError);
    CHECK_THROWS_AS(parse("[receiver]\nbeta = -1\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/haloscan.ini"), ConfigError);
}

TEST_CASE("hash follows the resolved values") {
    const CampaignConfig a = parse("");
    const CampaignConfig b = parse("[receiver]\nbeta = 7.1\n");
    const CampaignConfig c = parse("[receiver]\nbeta = 7.2\n");
    CHECK(a.hash == b.hash);
    CHECK(a.hash != c.hash);

    CampaignConfig d = a;
    override_seed(d, 5);
    CHECK(d.seed == 5);
    CHECK(d.hash != a.hash);
    CHECK(d.hash == parse("[campaign]\nseed = 5\n").hash);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}
