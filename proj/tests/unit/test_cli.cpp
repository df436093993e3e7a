#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "fixtures.hpp"

// Exit-code contract of the CLI binary: 0 ok, 2 usage/config, 3 data,
// 4 provider.

#ifdef PERSONA_CLI_PATH

namespace {

int run(const std::string& args) {
    const std::string command = std::string(PERSONA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

const std::string kGoldenConfig = std::string(PERSONA_DATA_DIR) + "/configs/golden.json";

} // namespace

TEST_CASE("cli exit codes follow the contract") {
    CHECK(run("--help") == 0);
    CHECK(run("match --help") == 0);
    CHECK(run("--version") == 0);

    SUBCASE("usage and config errors exit 2") {
        CHECK(run("match --definitely-not-a-flag") == 2);
        CHECK(run("") == 2);                      // missing subcommand
        CHECK(run("match") == 2);                 // missing --config
        CHECK(run("--config /does/not/exist.json match") == 2);
        CHECK(run("--config " + kGoldenConfig + " --mode replay match") == 2); // no cache dir
    }
    SUBCASE("data errors exit 3") {
        fixtures::TempDir dir("cli_exit");
        // profile before match: selected identities are missing.
        CHECK(run("--config " + kGoldenConfig + " --set out_dir=" + dir.path().string() +
                  " profile") == 3);
    }
    SUBCASE("a full match stage exits 0") {
        fixtures::TempDir dir("cli_ok");
        CHECK(run("--config " + kGoldenConfig + " --set out_dir=" + dir.path().string() +
                  " match") == 0);
        CHECK(std::filesystem::exists(dir.path() / "identities_selected.jsonl"));
    }
}

#endif // PERSONA_CLI_PATH
