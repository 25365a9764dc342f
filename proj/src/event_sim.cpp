#include "mdsdelay/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <random>
#include <sstream>

#include "mdsdelay/errors.hpp"
#include "mdsdelay/kernels.hpp"

namespace mdsdelay::sim {

namespace {

enum StreamId : std::uint32_t { kArrivals = 1, kLifetimes = 2, kRequests = 3, kChoices = 4 };

// One independent generator per random stream, derived from the master seed.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint32_t id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id,
                          0x6d647364u};
        rng_.seed(seq);
    }

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
    std::size_t pick(std::size_t count) {
        return std::min(count - 1, static_cast<std::size_t>(uniform() * static_cast<double>(count)));
    }

private:
    std::mt19937_64 rng_;
};

struct Event {
    double time;
    EventKind kind;
    std::uint64_t seq;
    std::int64_t subject;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

struct Node {
    double departure_time = 0.0;
    bool alive = true;
    bool storage = false;
    bool in_population = false;
    std::size_t population_slot = 0;
};

struct Session {
    std::int64_t request = -1;
    double start = 0.0;
    double requester_departure = 0.0;
    int needed = 0;
    int obtained = 0;
    int slots = 0;
    std::int64_t chosen = -1;
    std::vector<std::int64_t> list;
    std::vector<char> contacted;
};

struct Moments {
    std::int64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double v) {
        ++count;
        sum += v;
        sum_sq += v * v;
    }
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
    double stderr_of_mean() const {
        if (count < 2) return 0.0;
        const double n = static_cast<double>(count);
        const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
        return std::sqrt(var / n);
    }
};

class Simulator {
public:
    explicit Simulator(const SimConfig& cfg)
        : cfg_(cfg),
          p_(cfg.params),
          n_(cfg.code.n),
          k_(cfg.code.k),
          warmup_(cfg.effective_warmup()),
          total_(cfg.effective_warmup() + cfg.effective_num_requests()),
          arrivals_(cfg.seed, kArrivals),
          lifetimes_(cfg.seed, kLifetimes),
          requests_(cfg.seed, kRequests),
          choices_(cfg.seed, kChoices) {
        report_.outcome_counts.assign(static_cast<std::size_t>(k_) + 1, 0);
        report_.list_size_counts.assign(static_cast<std::size_t>(n_) + 1, 0);
        report_.delay_histogram.bin_width = p_.d2d_symbol_time / 2.0;
    }

    SimReport run();

private:
    bool physical() const { return cfg_.mode == Mode::Physical; }
    bool counted(std::int64_t request) const { return request >= warmup_; }

    void schedule(double time, EventKind kind, std::int64_t subject = -1) {
        queue_.push(Event{time, kind, seq_++, subject});
    }

    std::int64_t new_node(bool in_population) {
        Node node;
        node.departure_time = now_ + lifetimes_.exponential(p_.departure_rate);
        node.in_population = in_population;
        const auto id = static_cast<std::int64_t>(nodes_.size());
        if (in_population) {
            node.population_slot = population_.size();
            population_.push_back(id);
        }
        nodes_.push_back(node);
        schedule(node.departure_time, EventKind::NodeDeparture, id);
        if (in_population && cfg_.request_model == RequestModel::PerNode && requesting())
            schedule(now_ + requests_.exponential(p_.request_rate_per_node), EventKind::FileRequest, id);
        return id;
    }

    bool requesting() const { return cfg_.scripted_requests.empty() && issued_ < total_; }

    void on_repair();
    void on_departure(std::int64_t id);
    void on_arrival();
    void on_request(std::int64_t subject);
    void start_attempt();
    void on_attempt_end(std::int64_t request);
    void finish_session(double end);
    void complete(std::int64_t request, double delay);

    const SimConfig& cfg_;
    const SystemParams& p_;
    const int n_;
    const int k_;
    const std::int64_t warmup_;
    const std::int64_t total_;

    Stream arrivals_;
    Stream lifetimes_;
    Stream requests_;
    Stream choices_;

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;
    double last_time_ = 0.0;
    double population_area_ = 0.0;

    std::vector<Node> nodes_;
    std::vector<std::int64_t> population_;
    std::vector<std::int64_t> storage_;  // live listed storage nodes
    std::optional<Session> session_;
    std::vector<double> request_issue_time_;

    std::int64_t issued_ = 0;
    std::int64_t outstanding_ = 0;

    Moments delay_;
    Moments occupancy_;
    Moments first_half_;
    Moments second_half_;
    double symbols_sum_ = 0.0;
    SimReport report_;
};

void Simulator::on_repair() {
    if (physical()) {
        // Refill the list from present nodes that do not hold a symbol yet.
        std::vector<std::int64_t> free_nodes;
        for (std::int64_t id : population_)
            if (!nodes_[static_cast<std::size_t>(id)].storage) free_nodes.push_back(id);
        while (static_cast<int>(storage_.size()) < n_ && !free_nodes.empty()) {
            const std::size_t i = choices_.pick(free_nodes.size());
            const std::int64_t id = free_nodes[i];
            free_nodes[i] = free_nodes.back();
            free_nodes.pop_back();
            nodes_[static_cast<std::size_t>(id)].storage = true;
            storage_.push_back(id);
        }
    } else {
        // Lifetimes are memoryless: surviving storage nodes keep theirs, lost
        // ones are replaced by fresh nodes.
        while (static_cast<int>(storage_.size()) < n_) {
            const std::int64_t id = new_node(false);
            nodes_[static_cast<std::size_t>(id)].storage = true;
            storage_.push_back(id);
        }
    }
    schedule(now_ + p_.repair_interval, EventKind::RepairBroadcast);
}

void Simulator::on_departure(std::int64_t id) {
    Node& node = nodes_.at(static_cast<std::size_t>(id));
    if (!node.alive) throw SimulationFault("node departed twice");
    node.alive = false;
    if (node.storage) {
        auto it = std::find(storage_.begin(), storage_.end(), id);
        if (it == storage_.end()) throw SimulationFault("storage node missing from list");
        storage_.erase(it);
        node.storage = false;
    }
    if (node.in_population) {
        if (population_.empty()) throw SimulationFault("negative population");
        const std::size_t slot = node.population_slot;
        const std::int64_t moved = population_.back();
        population_[slot] = moved;
        nodes_[static_cast<std::size_t>(moved)].population_slot = slot;
        population_.pop_back();
    }
}

void Simulator::on_arrival() {
    new_node(true);
    schedule(now_ + arrivals_.exponential(p_.expected_node_count * p_.arrival_rate_per_slot()), EventKind::NodeArrival);
}

void Simulator::on_request(std::int64_t subject) {
    std::int64_t requester = -1;
    if (physical()) {
        if (cfg_.request_model == RequestModel::PerNode && cfg_.scripted_requests.empty()) {
            if (!nodes_.at(static_cast<std::size_t>(subject)).alive) return;  // stale
            requester = subject;
        } else {
            if (population_.empty()) {
                if (cfg_.scripted_requests.empty() && requesting())
                    schedule(now_ + requests_.exponential(p_.request_rate_per_node * p_.expected_node_count),
                             EventKind::FileRequest);
                return;
            }
            requester = population_[choices_.pick(population_.size())];
        }
    }
    if (issued_ >= total_) return;

    const std::int64_t request = issued_++;
    ++outstanding_;
    request_issue_time_.push_back(now_);

    if (cfg_.scripted_requests.empty() && requesting()) {
        if (cfg_.request_model == RequestModel::PerNode)
            schedule(now_ + requests_.exponential(p_.request_rate_per_node), EventKind::FileRequest, subject);
        else
            schedule(now_ + requests_.exponential(p_.request_rate_per_node * p_.expected_node_count),
                     EventKind::FileRequest);
    }

    const bool holds_symbol = requester >= 0 && nodes_[static_cast<std::size_t>(requester)].storage;
    const int needed = holds_symbol ? k_ - 1 : k_;
    const bool busy = session_.has_value();

    if (counted(request)) {
        ++report_.requests;
        if (busy) ++report_.busy_requests;
        report_.list_size_counts[storage_.size()] += 1;
    }

    if (needed == 0) {
        complete(request, 0.0);
        return;
    }
    if (busy) {
        schedule(now_ + needed * p_.bs_symbol_time, EventKind::BsDownloadEnd, request);
        return;
    }

    Session s;
    s.request = request;
    s.start = now_;
    s.needed = needed;
    s.requester_departure = requester >= 0 ? nodes_[static_cast<std::size_t>(requester)].departure_time
                                           : now_ + lifetimes_.exponential(p_.departure_rate);
    for (std::int64_t id : storage_)
        if (id != requester) s.list.push_back(id);
    s.contacted.assign(s.list.size(), 0);
    session_ = std::move(s);
    start_attempt();
}

void Simulator::start_attempt() {
    Session& s = *session_;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < s.list.size(); ++i)
        if (!s.contacted[i] && nodes_[static_cast<std::size_t>(s.list[i])].alive) candidates.push_back(i);

    ++s.slots;
    const double slot_end = now_ + p_.d2d_symbol_time;
    if (candidates.empty()) {
        s.chosen = -1;
        if (physical()) {
            --s.slots;
            finish_session(now_);
            return;
        }
        schedule(slot_end, EventKind::D2dAttemptEnd, s.request);
        return;
    }
    const std::size_t pick = candidates[choices_.pick(candidates.size())];
    s.contacted[pick] = 1;
    s.chosen = s.list[pick];
    double end = slot_end;
    if (physical()) end = std::min(end, nodes_[static_cast<std::size_t>(s.chosen)].departure_time);
    schedule(end, EventKind::D2dAttemptEnd, s.request);
}

void Simulator::on_attempt_end(std::int64_t request) {
    if (!session_ || session_->request != request) throw SimulationFault("orphan D2D attempt end");
    Session& s = *session_;
    const bool source_alive = s.chosen >= 0 && nodes_[static_cast<std::size_t>(s.chosen)].alive;
    const bool requester_alive = s.requester_departure > now_;
    if (source_alive && requester_alive) {
        ++s.obtained;
        if (s.obtained == s.needed) {
            finish_session(now_);
            return;
        }
        start_attempt();
        return;
    }
    finish_session(now_);
}

void Simulator::finish_session(double end) {
    const Session s = std::move(*session_);
    session_.reset();
    const double occupancy = end - s.start;
    if (counted(s.request)) {
        ++report_.d2d_requests;
        std::size_t bucket = 0;
        if (s.obtained == s.needed)
            bucket = static_cast<std::size_t>(k_);
        else
            bucket = static_cast<std::size_t>(s.obtained);
        report_.outcome_counts[bucket] += 1;
        symbols_sum_ += s.obtained;
        occupancy_.add(occupancy);
        const std::int64_t index = s.request - warmup_;
        if (index < cfg_.effective_num_requests() / 2)
            first_half_.add(occupancy);
        else
            second_half_.add(occupancy);
    }
    const int missing = s.needed - s.obtained;
    if (missing == 0) {
        complete(s.request, end - s.start);
        return;
    }
    schedule(end + missing * p_.bs_symbol_time, EventKind::BsDownloadEnd, s.request);
}

void Simulator::complete(std::int64_t request, double delay) {
    if (outstanding_ <= 0) throw SimulationFault("completion without outstanding request");
    --outstanding_;
    if (!counted(request)) return;
    delay_.add(delay);
    auto& hist = report_.delay_histogram;
    const auto bin = static_cast<std::size_t>(delay / hist.bin_width);
    if (hist.counts.size() <= bin) hist.counts.resize(bin + 1, 0);
    hist.counts[bin] += 1;
}

SimReport Simulator::run() {
    schedule(0.0, EventKind::RepairBroadcast);
    const auto initial = static_cast<int>(std::lround(p_.expected_node_count));
    for (int i = 0; i < initial; ++i) new_node(true);
    schedule(arrivals_.exponential(p_.expected_node_count * p_.arrival_rate_per_slot()), EventKind::NodeArrival);

    if (!cfg_.scripted_requests.empty()) {
        for (double t : cfg_.scripted_requests) schedule(t, EventKind::FileRequest);
    } else if (cfg_.request_model == RequestModel::AggregatePoisson) {
        schedule(requests_.exponential(p_.request_rate_per_node * p_.expected_node_count), EventKind::FileRequest);
    }

    while (issued_ < total_ || outstanding_ > 0) {
        if (queue_.empty()) throw SimulationFault("event queue drained with requests pending");
        const Event ev = queue_.top();
        queue_.pop();
        if (ev.time < now_) throw SimulationFault("event scheduled in the past");
        population_area_ += static_cast<double>(population_.size()) * (ev.time - last_time_);
        last_time_ = ev.time;
        now_ = ev.time;
        switch (ev.kind) {
            case EventKind::RepairBroadcast: on_repair(); break;
            case EventKind::NodeDeparture: on_departure(ev.subject); break;
            case EventKind::NodeArrival: on_arrival(); break;
            case EventKind::FileRequest: on_request(ev.subject); break;
            case EventKind::D2dAttemptEnd: on_attempt_end(ev.subject); break;
            case EventKind::BsDownloadEnd: {
                const double issued_at = request_issue_time_.at(static_cast<std::size_t>(ev.subject));
                complete(ev.subject, now_ - issued_at);
                break;
            }
        }
    }

    SimReport& r = report_;
    r.simulated_time = now_;
    r.time_average_population = now_ > 0.0 ? population_area_ / now_ : 0.0;
    r.mean_delay = delay_.mean();
    r.delay_stderr = delay_.stderr_of_mean();
    if (r.requests > 0) {
        r.busy_fraction = static_cast<double>(r.busy_requests) / static_cast<double>(r.requests);
        r.busy_fraction_stderr = std::sqrt(r.busy_fraction * (1.0 - r.busy_fraction) / static_cast<double>(r.requests));
    }
    if (r.d2d_requests > 0) {
        const double d = static_cast<double>(r.d2d_requests);
        r.empirical_outcome.p_fail_first = static_cast<double>(r.outcome_counts[0]) / d;
        for (int j = 1; j < k_; ++j)
            r.empirical_outcome.p_partial.push_back(static_cast<double>(r.outcome_counts[static_cast<std::size_t>(j)]) / d);
        r.empirical_outcome.p_full = static_cast<double>(r.outcome_counts[static_cast<std::size_t>(k_)]) / d;
        r.mean_d2d_symbols = symbols_sum_ / d;
    } else {
        r.empirical_outcome.p_partial.assign(static_cast<std::size_t>(k_ - 1), 0.0);
    }
    r.mean_occupancy = occupancy_.mean();
    r.occupancy_stderr = occupancy_.stderr_of_mean();
    r.occupancy_first_half = first_half_.mean();
    r.occupancy_first_half_stderr = first_half_.stderr_of_mean();
    r.occupancy_second_half = second_half_.mean();
    r.occupancy_second_half_stderr = second_half_.stderr_of_mean();
    return r;
}

}  // namespace

std::int64_t SimConfig::effective_warmup() const {
    if (!scripted_requests.empty()) return 0;
    if (warmup_requests >= 0) return warmup_requests;
    return std::max<std::int64_t>(1000, num_requests / 10);
}

std::int64_t SimConfig::effective_num_requests() const {
    if (!scripted_requests.empty()) return static_cast<std::int64_t>(scripted_requests.size());
    return num_requests;
}

void SimConfig::validate() const {
    params.validate();
    code.validate();
    if (scripted_requests.empty()) {
        if (num_requests < 1) throw InvalidParameter("num_requests must be >= 1");
        if (!(params.request_rate_per_node > 0.0))
            throw InvalidParameter("simulation needs request_rate_per_node > 0 or scripted requests");
    } else {
        if (!std::is_sorted(scripted_requests.begin(), scripted_requests.end()) || scripted_requests.front() < 0.0)
            throw InvalidParameter("scripted request times must be ascending and >= 0");
    }
    if (mode == Mode::Faithful && request_model == RequestModel::PerNode)
        throw InvalidParameter("per-node requests require Physical mode");
}

SimReport simulate(const SimConfig& config) {
    config.validate();
    Simulator sim(config);
    return sim.run();
}

AttemptOracleReport d2d_attempt_oracle(const SystemParams& params, const CodeParams& code, std::int64_t trials,
                                       std::uint64_t seed) {
    params.validate();
    code.validate();
    if (trials < 1) throw InvalidParameter("trials must be >= 1");

    const double mu = params.departure_rate;
    const double td = params.d2d_symbol_time;
    const int n = code.n;
    const int k = code.k;

    const Pmf h = kernels::availability_pmf(params, n);
    std::vector<double> cdf;
    double acc = 0.0;
    for (double m : h.masses()) cdf.push_back(acc += m);

    Stream availability(seed, kRequests);
    Stream lifetimes(seed, kLifetimes);
    Stream choices(seed, kChoices);

    std::vector<std::int64_t> counts(static_cast<std::size_t>(k) + 1, 0);
    std::vector<double> node_life(static_cast<std::size_t>(n));
    std::vector<char> contacted(static_cast<std::size_t>(n));
    std::vector<int> candidates;
    candidates.reserve(static_cast<std::size_t>(n));
    Moments occupancy;
    double symbols = 0.0;

    for (std::int64_t t = 0; t < trials; ++t) {
        const double u = availability.uniform();
        int x1 = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        x1 = std::min(x1, n);
        for (int i = 0; i < x1; ++i) {
            node_life[static_cast<std::size_t>(i)] = lifetimes.exponential(mu);
            contacted[static_cast<std::size_t>(i)] = 0;
        }
        const double requester_life = lifetimes.exponential(mu);

        int obtained = 0;
        int slot = 1;
        for (;; ++slot) {
            const double slot_start = (slot - 1) * td;
            const double slot_end = slot * td;
            candidates.clear();
            for (int i = 0; i < x1; ++i)
                if (!contacted[static_cast<std::size_t>(i)] && node_life[static_cast<std::size_t>(i)] > slot_start)
                    candidates.push_back(i);
            if (requester_life <= slot_end || candidates.empty()) break;
            const int pick = candidates[choices.pick(candidates.size())];
            contacted[static_cast<std::size_t>(pick)] = 1;
            if (node_life[static_cast<std::size_t>(pick)] <= slot_end) break;
            if (++obtained == k) break;
        }
        counts[obtained == k ? static_cast<std::size_t>(k) : static_cast<std::size_t>(obtained)] += 1;
        occupancy.add(slot * td);
        symbols += obtained;
    }

    AttemptOracleReport r;
    r.trials = trials;
    r.outcome_counts = counts;
    const double nt = static_cast<double>(trials);
    auto freq = [&](std::size_t i) { return static_cast<double>(counts[i]) / nt; };
    r.frequencies.p_fail_first = freq(0);
    for (int j = 1; j < k; ++j) r.frequencies.p_partial.push_back(freq(static_cast<std::size_t>(j)));
    r.frequencies.p_full = freq(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < counts.size(); ++i) r.stderrs.push_back(std::sqrt(freq(i) * (1.0 - freq(i)) / nt));
    r.mean_occupancy = occupancy.mean();
    r.occupancy_stderr = occupancy.stderr_of_mean();
    r.mean_symbols = symbols / nt;
    return r;
}

}  // namespace mdsdelay::sim
