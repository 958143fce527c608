#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string output;
};

/// Runs the CLI with stderr folded into stdout.
Run cli(const std::string& args) {
    const std::string cmd = std::string(ACTIVETEACH_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("activeteach-cli-") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    fs::path dir_;
};

/// Asks the kernel for an ephemeral port and releases it again.
int free_port() {
    const int sock = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    socklen_t len = sizeof(addr);
    int port = -1;
    if (::bind(sock, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0 &&
        ::getsockname(sock, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
        port = ntohs(addr.sin_port);
    }
    ::close(sock);
    return port;
}

const char* kTiny = R"({"population_size": 3, "item_count": 12, "schedule": {"sessions": 2, "iterations": 10},
  "model": "isef", "grid": {"alpha_points": 6, "beta_points": 6}, "seed": 7})";

}  // namespace

TEST_F(CliTest, MissingConfig) {
    const auto r = cli("simulate " + (dir_ / "absent.json").string() + " -o " + (dir_ / "out").string());
    EXPECT_NE(r.status, 0);
    EXPECT_EQ(r.status, 3) << r.output;
}

TEST_F(CliTest, InvalidConfigNamesField) {
    const auto cfg = write("bad.json", R"({"population_size": 3, "rho": 1.5})");
    const auto r = cli("simulate " + cfg.string() + " -o " + (dir_ / "out").string());
    EXPECT_EQ(r.status, 2) << r.output;
    EXPECT_NE(r.output.find("rho"), std::string::npos) << r.output;
}

TEST_F(CliTest, UnknownOption) {
    EXPECT_EQ(cli("simulate --frobnicate").status, 2);
}

TEST_F(CliTest, SimulateAndAnalyze) {
    const auto cfg = write("tiny.json", kTiny);
    const auto out = dir_ / "out";
    auto r = cli("simulate " + cfg.string() + " -o " + out.string());
    ASSERT_EQ(r.status, 0) << r.output;
    for (const char* f : {"metrics.tsv", "prediction_error.tsv", "learners.tsv", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    const auto metrics = slurp(out / "metrics.tsv");
    EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 1 + 3 * 3);

    // Same config, same bytes.
    const auto again = dir_ / "again";
    ASSERT_EQ(cli("simulate " + cfg.string() + " -o " + again.string() + " -j 2").status, 0);
    for (const char* f : {"metrics.tsv", "prediction_error.tsv", "learners.tsv", "manifest.json"}) {
        EXPECT_EQ(slurp(out / f), slurp(again / f)) << f;
    }

    r = cli("analyze " + out.string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(out / "report.txt"));
    EXPECT_TRUE(fs::exists(out / "comparisons.tsv"));
    EXPECT_NE(r.output.find("myopic"), std::string::npos);
}

TEST_F(CliTest, AnalyzeNeedsTwoArms) {
    const auto cfg = write("one.json", R"({"population_size": 2, "item_count": 5, "teachers": ["leitner"],
      "schedule": {"sessions": 1, "iterations": 5}, "grid": {"alpha_points": 4, "beta_points": 4}})");
    const auto out = dir_ / "out";
    ASSERT_EQ(cli("simulate " + cfg.string() + " -o " + out.string()).status, 0);
    const auto r = cli("analyze " + out.string());
    EXPECT_NE(r.status, 0);
    EXPECT_EQ(cli("analyze " + (dir_ / "nothing").string()).status, 3);
}

TEST_F(CliTest, ServeRejectsBadVocabularyPath) {
    const auto r = cli("serve --port 0 --data-dir " + (dir_ / "data").string() + " --vocabulary " +
                       (dir_ / "missing.tsv").string());
    EXPECT_EQ(r.status, 3) << r.output;
}

TEST_F(CliTest, ServeRejectsMalformedVocabulary) {
    const auto vocab = write("v.tsv", "a\tb\n");
    const auto r = cli("serve --port 0 --data-dir " + (dir_ / "data").string() + " --vocabulary " + vocab.string());
    EXPECT_EQ(r.status, 2) << r.output;
    EXPECT_NE(r.output.find("line 1"), std::string::npos) << r.output;
}

TEST_F(CliTest, ServeOnOccupiedPort) {
    httplib::Server blocker;
    const int port = blocker.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    const auto vocab = fs::path(ACTIVETEACH_SOURCE_DIR) / "data" / "sample_vocabulary.tsv";
    const auto r = cli("serve --port " + std::to_string(port) + " --data-dir " + (dir_ / "data").string() +
                       " --vocabulary " + vocab.string());
    EXPECT_EQ(r.status, 3) << r.output;
}

TEST_F(CliTest, ServeDefaultConfigAnswersHealth) {
    const int port = free_port();
    ASSERT_GT(port, 0);
    const auto vocab = fs::path(ACTIVETEACH_SOURCE_DIR) / "data" / "sample_vocabulary.tsv";
    const std::string cmd = std::string(ACTIVETEACH_CLI) + " serve --port " + std::to_string(port) +
                            " --data-dir " + (dir_ / "data").string() + " --vocabulary " + vocab.string() +
                            " > " + (dir_ / "serve.log").string() + " 2>&1 & echo $!";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    ASSERT_TRUE(pipe);
    int pid = 0;
    ASSERT_EQ(std::fscanf(pipe, "%d", &pid), 1);
    ::pclose(pipe);

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(5, 0);
    httplib::Result res;
    for (int attempt = 0; attempt < 100 && !res; ++attempt) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        res = client.Get("/health");
    }
    ASSERT_TRUE(res) << slurp(dir_ / "serve.log");
    EXPECT_EQ(res->status, 200);
    EXPECT_NE(res->body.find("\"vocabulary\":133"), std::string::npos) << res->body;

    ::kill(pid, SIGTERM);
    for (int attempt = 0; attempt < 100 && ::kill(pid, 0) == 0; ++attempt) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    EXPECT_NE(slurp(dir_ / "serve.log").find("stopped"), std::string::npos);
}
