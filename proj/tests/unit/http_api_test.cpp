#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "activeteach/tutor/http_api.hpp"

using namespace activeteach;
using namespace activeteach::tutor;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr Seconds kStart = 2'000'000.0;

class ApiFixture : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("activeteach-http-" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        ServiceConfig cfg;
        cfg.data_dir = dir_;
        cfg.items_per_arm = 10;
        cfg.session_questions = 5;
        cfg.training_days = 2;
        cfg.grid = GridSpec{6, 2e-7, 2.5e-2, 6, 1e-4, 0.9999};
        cfg.allow_time_override = true;
        clock_ = std::make_shared<ManualClock>(kStart);
        service_ = std::make_unique<TutorService>(cfg, clock_);
        std::ostringstream doc;
        for (int i = 0; i < 30; ++i) doc << "w" << i << "\tp" << i << "\ta" << i << "\n";
        std::istringstream in(doc.str());
        service_->ingest_vocabulary(in);

        api_ = std::make_unique<HttpApi>(*service_);
        port_ = api_->bind("127.0.0.1", 0);
        server_ = std::thread([this] { api_->run(); });
        api_->wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }

    void TearDown() override {
        api_->stop();
        server_.join();
        api_.reset();
        service_.reset();
        fs::remove_all(dir_);
    }

    httplib::Headers auth(const std::string& token, std::optional<Seconds> now = std::nullopt) {
        httplib::Headers h{{"X-User-Token", token}};
        if (now) h.emplace("X-Debug-Now", std::to_string(*now));
        return h;
    }

    json create(const std::string& id) {
        auto res = client_->Post("/users", json{{"id", id}, {"start", kStart}}.dump(), "application/json");
        EXPECT_TRUE(res);
        EXPECT_EQ(res->status, 201);
        return json::parse(res->body);
    }

    fs::path dir_;
    std::shared_ptr<ManualClock> clock_;
    std::unique_ptr<TutorService> service_;
    std::unique_ptr<HttpApi> api_;
    std::thread server_;
    int port_ = 0;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace

TEST_F(ApiFixture, Health) {
    auto res = client_->Get("/health");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    const auto body = json::parse(res->body);
    EXPECT_EQ(body["status"], "ok");
    EXPECT_EQ(body["vocabulary"], 30);
}

TEST_F(ApiFixture, TrainingRoundTrip) {
    const auto user = create("ann");
    const std::string token = user["token"];
    const std::string base = "/users/ann";

    auto res = client_->Get(base + "/schedule", auth(token));
    ASSERT_EQ(res->status, 200);
    const auto schedule = json::parse(res->body);
    ASSERT_EQ(schedule["sessions"].size(), 4u);
    const int arm = schedule["sessions"][0]["arm"];

    res = client_->Get(base + "/arms/" + std::to_string(arm) + "/next", auth(token));
    ASSERT_EQ(res->status, 200);
    const auto q = json::parse(res->body);
    EXPECT_EQ(q["phase"], "train");
    EXPECT_TRUE(q["first_presentation"]);
    EXPECT_EQ(q["choices"].size(), 6u);
    const std::string answer = q["answer"];

    res = client_->Post(base + "/arms/" + std::to_string(arm) + "/answer", auth(token),
                        json{{"trial", q["trial"]}, {"item", q["item"]}, {"choice", answer}}.dump(),
                        "application/json");
    ASSERT_EQ(res->status, 200);
    const auto ack = json::parse(res->body);
    EXPECT_TRUE(ack["correct"]);
    EXPECT_EQ(ack["answered"], 1);

    res = client_->Post(base + "/arms/" + std::to_string(arm) + "/answer", auth(token),
                        json{{"trial", q["trial"]}, {"item", q["item"]}, {"choice", answer}}.dump(),
                        "application/json");
    EXPECT_EQ(res->status, 409);
    EXPECT_EQ(json::parse(res->body)["error"], "duplicate_submission");

    res = client_->Get(base + "/stats", auth(token));
    ASSERT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["arms"].size(), 2u);
}

TEST_F(ApiFixture, Errors) {
    const auto user = create("bob");
    const std::string token = user["token"];

    auto res = client_->Get("/users/bob/schedule", auth("wrong"));
    EXPECT_EQ(res->status, 401);
    EXPECT_EQ(json::parse(res->body)["error"], "unauthorized");

    res = client_->Get("/users/nobody/schedule", auth(token));
    EXPECT_EQ(res->status, 404);

    res = client_->Get("/users/bob/arms/2/next", auth(token));
    EXPECT_EQ(res->status, 404);

    res = client_->Post("/users", "{not json", "application/json");
    EXPECT_EQ(res->status, 400);
    EXPECT_EQ(json::parse(res->body)["error"], "bad_request");

    res = client_->Post("/users", json{{"id", "bob"}}.dump(), "application/json");
    EXPECT_EQ(res->status, 409);

    res = client_->Post("/users/bob/arms/0/answer", auth(token), json{{"trial", 0}}.dump(), "application/json");
    EXPECT_EQ(res->status, 400);

    res = client_->Get("/users/bob/arms/0/next", auth(token, kStart - 100.0));
    EXPECT_EQ(res->status, 409);
    EXPECT_EQ(json::parse(res->body)["error"], "outside_session_window");

    res = client_->Get("/users/bob/arms/0/next", httplib::Headers{{"X-User-Token", token}, {"X-Debug-Now", "soon"}});
    EXPECT_EQ(res->status, 400);
}

TEST_F(ApiFixture, EvaluationEndpoints) {
    const auto user = create("cy");
    const std::string token = user["token"];
    auto res = client_->Get("/users/cy/arms/1/evaluation/next", auth(token, kStart + 10.0));
    EXPECT_EQ(res->status, 409);
    EXPECT_EQ(json::parse(res->body)["error"], "outside_session_window");

    res = client_->Get("/users/cy/arms/1/evaluation", auth(token));
    ASSERT_EQ(res->status, 200);
    const auto body = json::parse(res->body);
    EXPECT_EQ(body["n_seen"], 0);
    EXPECT_TRUE(body["ratio"].is_null());
}
