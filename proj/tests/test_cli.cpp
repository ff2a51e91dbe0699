#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "oneshot/capacity.hpp"
#include "oneshot/json_io.hpp"

using namespace oneshot;
using nlohmann::json;

namespace {

std::string cli_path() {
    const char* env = std::getenv("ONESHOT_CLI");
    if (!env) throw std::runtime_error("ONESHOT_CLI not set");
    return env;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, const std::string& extra_env = "") {
    std::string cmd = extra_env + " " + cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WEXITSTATUS(status);
    return r;
}

class Fixtures {
  public:
    Fixtures() {
        char tmpl[] = "/tmp/oneshot_cli_XXXXXX";
        dir_ = mkdtemp(tmpl);
        write("mes2.json", R"({"layout": [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}],
            "vector": [[0.70710678118654752, 0], [0, 0], [0, 0], [0.70710678118654752, 0]]})");
        write("identity2.json", R"({"kind": "identity", "dim": 2})");
        write("deph2.json", R"({"kind": "dephasing", "dim": 2, "param": 0.5})");

        // two uses of the qubit dephasing channel, in explicit Kraus form
        KrausChannel deph2 = tensor_power(make_channel(ChannelKind::dephasing, 2, 0.5), 2);
        json ch;
        ch["name"] = "dephasing_two_uses";
        ch["dim_in"] = 4;
        ch["dim_out"] = 4;
        ch["kraus"] = json::array();
        for (const auto& k : deph2.kraus()) ch["kraus"].push_back(io::matrix_to_json(k));
        write("deph2x.json", ch.dump());

        DensityOperator tau4 = maximally_mixed(SystemLayout::single("Ain", 4));
        json st;
        st["layout"] = json::array({{{"label", "Ain"}, {"dim", 4}}});
        st["matrix"] = io::matrix_to_json(tau4.matrix());
        write("tau4.json", st.dump());
    }

    std::string path(const std::string& name) const { return dir_ + "/" + name; }

  private:
    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ + "/" + name);
        out << content;
    }
    std::string dir_;
};

const Fixtures& fixtures() {
    static Fixtures f;
    return f;
}

}  // namespace

TEST_CASE("cli: min-entropy of the entangled pair") {
    RunResult r = run_cli("entropy --state " + fixtures().path("mes2.json") +
                          " --split \"A;B\" --kind hmin --eps 0");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    REQUIRE(j.at("value").get<double>() == Catch::Approx(-1.0).margin(1e-6));
    REQUIRE(j.at("validity").get<std::string>() == "ok");
    REQUIRE(j.contains("gap"));
}

TEST_CASE("cli: repeated invocations are byte-identical") {
    std::string cmd = "entropy --state " + fixtures().path("mes2.json") +
                      " --split \"A;B\" --kind hmax --eps 0.05";
    RunResult a = run_cli(cmd);
    RunResult b = run_cli(cmd);
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.out == b.out);

    std::string dec = "decouple --channel " + fixtures().path("deph2x.json") + " --input " +
                      fixtures().path("tau4.json") + " --eps 0.05 --trials 4 --seed 11";
    RunResult c = run_cli(dec);
    RunResult d = run_cli(dec);
    REQUIRE(c.exit_code == 0);
    REQUIRE(c.out == d.out);
}

TEST_CASE("cli: classical bounds with validity flags") {
    RunResult r = run_cli("bounds --channel " + fixtures().path("identity2.json") +
                          " --mode eac --eps 1e-4");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    REQUIRE(j.at("lower_validity").get<std::string>() == "vacuous_negative");
    REQUIRE(j.at("upper_validity").get<std::string>() == "smoothing_out_of_range");
    REQUIRE(j.at("upper").get<std::string>() == "inf");

    // the lower value matches an in-process evaluation at the same input
    KrausChannel id2 = make_channel(ChannelKind::identity, 2);
    DensityOperator tau = maximally_mixed(SystemLayout::single("Ain", 2));
    BoundReport rep = eac_bounds(id2, 1e-4, InputSearch::fixed(tau));
    REQUIRE(j.at("lower").get<double>() == Catch::Approx(rep.lower.value).margin(1e-9));
}

TEST_CASE("cli: asymptotic capacities of the noiseless channel") {
    RunResult r = run_cli("asymptotic --channel " + fixtures().path("identity2.json"));
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    REQUIRE(j.at("C_ea").get<double>() == Catch::Approx(2.0).margin(1e-4));
    REQUIRE(j.at("Q_ea").get<double>() == Catch::Approx(1.0).margin(5e-5));
}

TEST_CASE("cli: n-copy sweep emits CSV") {
    RunResult r = run_cli("sweep-n --channel " + fixtures().path("identity2.json") +
                          " --nmax 2 --eps 0");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("n,core_per_n,mutual_information\n") == 0);
    REQUIRE(r.out.find("1,2,2\n") != std::string::npos);
    REQUIRE(r.out.find("2,2,2\n") != std::string::npos);

    RunResult d = run_cli("sweep-n --channel " + fixtures().path("deph2.json") +
                          " --nmax 3 --eps 0.1");
    REQUIRE(d.exit_code == 0);
    int rows = 0;
    for (char c : d.out)
        if (c == '\n') ++rows;
    REQUIRE(rows == 4);  // header + n = 1, 2, 3
}

TEST_CASE("cli: optimized bound search") {
    RunResult r = run_cli("bounds --channel " + fixtures().path("deph2.json") +
                          " --mode eaq --eps 1e-2 --optimize --budget 2000 --seed 7");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    REQUIRE(j.at("lower").get<double>() <= 0.0);  // log-eps offsets dominate here
    REQUIRE(j.at("upper_validity").get<std::string>() == "smoothing_out_of_range");
    REQUIRE(j.contains("input"));
}

TEST_CASE("cli: decoupling experiment emits CSV plus summary") {
    RunResult r = run_cli("decouple --channel " + fixtures().path("deph2x.json") + " --input " +
                          fixtures().path("tau4.json") + " --eps 0.05 --trials 100 --seed 11");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("trial,error,bound,decoder_fidelity\n") == 0);
    std::size_t last_newline = r.out.find_last_of('\n', r.out.size() - 2);
    json summary = json::parse(r.out.substr(last_newline + 1));
    REQUIRE(summary.at("min_error_within_bound").get<bool>());
    REQUIRE(summary.at("mean_error").get<double>() >= summary.at("min_error").get<double>());
    // header + one hundred CSV rows + summary
    int rows = 0;
    for (char c : r.out)
        if (c == '\n') ++rows;
    REQUIRE(rows == 102);
}

TEST_CASE("cli: worker count does not change decoupling output") {
    std::string base = "decouple --channel " + fixtures().path("deph2x.json") + " --input " +
                       fixtures().path("tau4.json") + " --eps 0.05 --trials 6 --seed 11";
    RunResult serial = run_cli(base);
    RunResult parallel = run_cli("--jobs 2 " + base);
    REQUIRE(serial.exit_code == 0);
    REQUIRE(parallel.exit_code == 0);
    REQUIRE(serial.out == parallel.out);
}

TEST_CASE("cli: property check suite") {
    RunResult r = run_cli("check --suite appendix-a --seed 1 --quick");
    REQUIRE(r.exit_code == 0);
    for (const char* name :
         {"isometry_invariance", "chain_rule", "smoothing_product_ball", "conditioning_monotone",
          "duality_relation", "entropy_envelope", "superadditivity",
          "average_fidelity_identity"}) {
        REQUIRE(r.out.find(name) != std::string::npos);
    }
    REQUIRE(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("cli: validation failures exit with code 2") {
    REQUIRE(run_cli("entropy --state /nonexistent.json --split \"A;B\" --kind hmin").exit_code ==
            2);
    REQUIRE(run_cli("entropy --state " + fixtures().path("mes2.json") +
                    " --split \"A;B\" --kind hmin --eps 2.0")
                .exit_code == 2);  // smoothing radius outside [0,1) is a validation error
    REQUIRE(run_cli("bounds --mode eaq --eps 0.1").exit_code == 2);  // missing required option
    REQUIRE(run_cli("nonsense").exit_code == 2);
}

TEST_CASE("file parsing rejects malformed inputs") {
    using oneshot::io::channel_from_json;
    using oneshot::io::matrix_from_json;
    using oneshot::io::state_from_json;
    REQUIRE_THROWS_AS(matrix_from_json(json::parse(
                          R"({"rows":1,"cols":1,"entries":[[1,0]],"extra":2})")),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(matrix_from_json(json::parse(R"({"rows":2,"cols":1,"entries":[[1,0]]})")),
                      std::invalid_argument);
    REQUIRE_THROWS(matrix_from_json(json::parse(R"({"rows":1,"cols":1,"entries":[[null,0]]})")));
    REQUIRE_THROWS_AS(
        state_from_json(json::parse(R"({"layout":[{"label":"A","dim":2}]})")),
        std::invalid_argument);
    REQUIRE_THROWS_AS(channel_from_json(json::parse(R"({"kind":"warp","dim":2})")),
                      std::invalid_argument);
    // non-trace-preserving Kraus list
    REQUIRE_THROWS_AS(channel_from_json(json::parse(
                          R"({"dim_in":1,"dim_out":1,"kraus":[
                              {"rows":1,"cols":1,"entries":[[0.5,0]]}]})")),
                      std::invalid_argument);
}

TEST_CASE("cli: dimension cap override through the environment") {
    RunResult r = run_cli("sweep-n --channel " + fixtures().path("identity2.json") +
                              " --nmax 3 --eps 0",
                          "ONESHOT_MAX_DIM=4");
    REQUIRE(r.exit_code == 2);
}
