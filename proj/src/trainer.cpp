#include "jocot/trainer.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "jocot/errors.hpp"
#include "jocot/losses.hpp"

namespace jocot {

std::string to_string(TeacherKind kind) {
    switch (kind) {
        case TeacherKind::coteaching: return "coteaching";
        case TeacherKind::jocor: return "jocor";
        case TeacherKind::coteachingplus: return "coteachingplus";
    }
    return "unknown";
}

std::vector<Batch> make_batches(std::size_t n, int batch_size, Rng& rng) {
    if (batch_size <= 0) throw ArgumentError("batch_size must be positive");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<Batch> batches;
    const auto step = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0; start < n; start += step)
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + step)));
    return batches;
}

TeacherState TeacherState::create(TeacherKind kind, int input_dim, int num_classes, const TrainConfig& config) {
    const auto dims = layer_dims_for(input_dim, num_classes, config.hidden_dims);
    const bool jocor = kind == TeacherKind::jocor;
    Rng rng1(mix_seed(config.seed, jocor ? streams::jocor_net1 : streams::coteaching_net1));
    Rng rng2(mix_seed(config.seed, jocor ? streams::jocor_net2 : streams::coteaching_net2));
    TeacherState s;
    s.module_kind = kind;
    s.net1 = make_network(dims, rng1, config.adam);
    s.net2 = make_network(dims, rng2, config.adam);
    return s;
}

namespace {

RowMatrix gather(const RowMatrix& features, std::span<const std::size_t> rows) {
    RowMatrix out(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
        out.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
    return out;
}

std::span<const double> row_span(const RowMatrix& m, std::size_t r) {
    return {m.row(static_cast<Eigen::Index>(r)).data(), static_cast<std::size_t>(m.cols())};
}

int argmax(std::span<const double> p) {
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

// Mean-CE Adam step of `net` on the given global indices.
void ce_update(Network& net, const LabeledDataset& data, const SelectionSet& rows, double lr) {
    if (rows.empty()) return;
    const auto& idx = rows.indices();
    const RowMatrix x = gather(data.features, idx);
    auto loss = [&](std::size_t r, std::span<const double> probs, std::span<double> dprobs) {
        const int y = data.labels[idx[r]];
        per_sample_ce_grad(probs, y, dprobs);
        return per_sample_ce(probs, y);
    };
    GradientResult g = gradient(net.params, x, loss);
    adam_step(net.params, net.optimizer, g.grads, lr);
}

std::vector<IndexedLoss> indexed(std::span<const std::size_t> batch, const std::vector<double>& losses,
                                 std::span<const std::size_t> positions) {
    std::vector<IndexedLoss> out;
    out.reserve(positions.size());
    for (std::size_t p : positions) out.push_back({batch[p], losses[p]});
    return out;
}

double selected_sum(const SelectionSet& sel, const std::unordered_map<std::size_t, std::size_t>& pos,
                    const std::vector<double>& losses) {
    double s = 0.0;
    for (std::size_t i : sel.indices()) s += losses[pos.at(i)];
    return s;
}

std::unordered_map<std::size_t, std::size_t> positions_of(const Batch& batch) {
    std::unordered_map<std::size_t, std::size_t> pos;
    pos.reserve(batch.size());
    for (std::size_t p = 0; p < batch.size(); ++p) pos.emplace(batch[p], p);
    return pos;
}

bool skip_empty(const Batch& batch) {
    if (!batch.empty()) return false;
    std::cerr << "warning: skipping empty mini-batch\n";
    return true;
}

void require_kind(const TeacherState& state, TeacherKind kind, const char* op) {
    if (state.module_kind != kind)
        throw ArgumentError(std::string(op) + " called on a " + to_string(state.module_kind) + " teacher");
}

// Small-loss cross-update restricted to `candidates` (positions within the batch).
BatchRecord cross_update_step(TeacherState& state, const LabeledDataset& data, const Batch& batch,
                              const RowMatrix& p1, const RowMatrix& p2, std::span<const std::size_t> candidates,
                              double remember, double lr) {
    std::vector<double> ce1(batch.size()), ce2(batch.size());
    for (std::size_t p : candidates) {
        const int y = data.labels[batch[p]];
        ce1[p] = per_sample_ce(row_span(p1, p), y);
        ce2[p] = per_sample_ce(row_span(p2, p), y);
    }
    const auto l1 = indexed(batch, ce1, candidates);
    const auto l2 = indexed(batch, ce2, candidates);
    BatchRecord rec;
    rec.selected_by_net1 = small_loss_select(l1, remember);
    rec.selected_by_net2 = small_loss_select(l2, remember);
    rec.update_net1 = rec.selected_by_net2;
    rec.update_net2 = rec.selected_by_net1;
    const auto pos = positions_of(batch);
    rec.selected_loss_sum = selected_sum(rec.selected_by_net1, pos, ce1) + selected_sum(rec.selected_by_net2, pos, ce2);
    rec.selected_count = rec.selected_by_net1.size() + rec.selected_by_net2.size();

    ce_update(state.net1, data, rec.update_net1, lr);
    ce_update(state.net2, data, rec.update_net2, lr);
    return rec;
}

std::vector<std::size_t> all_positions(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

}  // namespace

void coteaching_epoch(TeacherState& state, const LabeledDataset& noisy_train, std::span<const Batch> batches,
                      double remember, double lr) {
    require_kind(state, TeacherKind::coteaching, "coteaching_epoch");
    state.epoch_selections.clear();
    for (const Batch& batch : batches) {
        if (skip_empty(batch)) continue;
        const RowMatrix x = gather(noisy_train.features, batch);
        const RowMatrix p1 = forward(state.net1.params, x);
        const RowMatrix p2 = forward(state.net2.params, x);
        const auto candidates = all_positions(batch.size());
        state.epoch_selections.push_back(
            cross_update_step(state, noisy_train, batch, p1, p2, candidates, remember, lr));
    }
}

void coteachingplus_epoch(TeacherState& state, const LabeledDataset& noisy_train, std::span<const Batch> batches,
                          double remember, double lr) {
    require_kind(state, TeacherKind::coteachingplus, "coteachingplus_epoch");
    state.epoch_selections.clear();
    for (const Batch& batch : batches) {
        if (skip_empty(batch)) continue;
        const RowMatrix x = gather(noisy_train.features, batch);
        const RowMatrix p1 = forward(state.net1.params, x);
        const RowMatrix p2 = forward(state.net2.params, x);
        std::vector<std::size_t> disagree;
        for (std::size_t p = 0; p < batch.size(); ++p)
            if (argmax(row_span(p1, p)) != argmax(row_span(p2, p))) disagree.push_back(p);
        const std::size_t disagreement = disagree.size();
        if (disagree.empty()) disagree = all_positions(batch.size());
        BatchRecord rec = cross_update_step(state, noisy_train, batch, p1, p2, disagree, remember, lr);
        rec.disagreement = disagreement;
        state.epoch_selections.push_back(std::move(rec));
    }
}

void jocor_epoch(TeacherState& state, const LabeledDataset& noisy_train, std::span<const Batch> batches,
                 double remember, double lr, double lambda_weight, bool shared_ranking) {
    require_kind(state, TeacherKind::jocor, "jocor_epoch");
    if (!(lambda_weight >= 0.0 && lambda_weight <= 1.0)) throw ArgumentError("lambda_weight must lie in [0, 1]");
    state.epoch_selections.clear();
    for (const Batch& batch : batches) {
        if (skip_empty(batch)) continue;
        const RowMatrix x = gather(noisy_train.features, batch);
        const RowMatrix p1 = forward(state.net1.params, x);
        const RowMatrix p2 = forward(state.net2.params, x);
        const std::size_t n = batch.size();

        std::vector<double> rank1(n), rank2(n);
        for (std::size_t p = 0; p < n; ++p) {
            const int y = noisy_train.labels[batch[p]];
            const double ce1 = per_sample_ce(row_span(p1, p), y);
            const double ce2 = per_sample_ce(row_span(p2, p), y);
            const double contrast = symmetric_kl(row_span(p1, p), row_span(p2, p));
            if (shared_ranking) {
                rank1[p] = rank2[p] = (1.0 - lambda_weight) * (ce1 + ce2) + lambda_weight * contrast;
            } else {
                rank1[p] = (1.0 - lambda_weight) * ce1 + lambda_weight * contrast;
                rank2[p] = (1.0 - lambda_weight) * ce2 + lambda_weight * contrast;
            }
        }
        const auto everything = all_positions(n);
        BatchRecord rec;
        rec.selected_by_net1 = small_loss_select(indexed(batch, rank1, everything), remember);
        rec.selected_by_net2 = small_loss_select(indexed(batch, rank2, everything), remember);
        rec.update_net1 = rec.selected_by_net1;
        rec.update_net2 = rec.selected_by_net2;
        const auto pos = positions_of(batch);
        rec.selected_loss_sum =
            selected_sum(rec.selected_by_net1, pos, rank1) + selected_sum(rec.selected_by_net2, pos, rank2);
        rec.selected_count = rec.selected_by_net1.size() + rec.selected_by_net2.size();

        // Both gradients come from the same pre-update predictions; the peer's
        // probabilities are constants with respect to the other net's parameters.
        auto joint_grad = [&](const Network& net, const SelectionSet& sel, const RowMatrix& peer_probs) {
            const auto& idx = sel.indices();
            const RowMatrix xs = gather(noisy_train.features, idx);
            auto loss = [&](std::size_t r, std::span<const double> probs, std::span<double> dprobs) {
                const std::size_t g = idx[r];
                const int y = noisy_train.labels[g];
                const auto peer = row_span(peer_probs, pos.at(g));
                jocor_per_sample_grad(probs, peer, y, lambda_weight, dprobs);
                return jocor_per_sample_loss({probs, peer}, y, lambda_weight);
            };
            return gradient(net.params, xs, loss);
        };
        GradientResult g1 = joint_grad(state.net1, rec.update_net1, p2);
        GradientResult g2 = joint_grad(state.net2, rec.update_net2, p1);
        adam_step(state.net1.params, state.net1.optimizer, g1.grads, lr);
        adam_step(state.net2.params, state.net2.optimizer, g2.grads, lr);
        state.epoch_selections.push_back(std::move(rec));
    }
}

void teacher_epoch(TeacherState& state, const LabeledDataset& noisy_train, std::span<const Batch> batches,
                   double remember, double lr, const TrainConfig& config) {
    switch (state.module_kind) {
        case TeacherKind::coteaching: coteaching_epoch(state, noisy_train, batches, remember, lr); break;
        case TeacherKind::jocor:
            jocor_epoch(state, noisy_train, batches, remember, lr, config.lambda_weight, config.jocor_shared_ranking);
            break;
        case TeacherKind::coteachingplus: coteachingplus_epoch(state, noisy_train, batches, remember, lr); break;
    }
}

double evaluate(const ModelParams& model, const LabeledDataset& test_set) {
    if (test_set.size() == 0) throw ArgumentError("evaluate: empty test set");
    const auto predicted = predict(model, test_set.features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == test_set.labels[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

namespace {

void check_training_inputs(const TrainConfig& config, const LabeledDataset& train) {
    config.validate();
    train.validate();
    if (train.size() == 0) throw ArgumentError("training set is empty");
}

std::optional<double> precision_of(const SelectionSet& clean, const Monitor& monitor, std::size_t n) {
    if (monitor.mask == nullptr || monitor.mask->num_flipped() == 0) return std::nullopt;
    return noisy_label_precision(complement(clean, n), *monitor.mask);
}

double mean_selected(std::span<const BatchRecord* const> records) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const BatchRecord* r : records) {
        sum += r->selected_loss_sum;
        count += r->selected_count;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace

TeacherRun train_teachers(const TrainConfig& config, const LabeledDataset& noisy_train, const Monitor& monitor) {
    check_training_inputs(config, noisy_train);
    TeacherRun run;
    run.jocor = TeacherState::create(TeacherKind::jocor, noisy_train.dim(), noisy_train.num_classes, config);
    run.coteaching = TeacherState::create(TeacherKind::coteaching, noisy_train.dim(), noisy_train.num_classes, config);
    Rng shuffle(mix_seed(config.seed, streams::teacher_shuffle));

    for (int epoch = 0; epoch < config.total_epochs; ++epoch) {
        const double remember = remember_rate(epoch, config.num_gradual_T, config.noise_rate_tau);
        const double lr = lr_at(epoch, config);
        const auto batches = make_batches(noisy_train.size(), config.batch_size, shuffle);

        teacher_epoch(run.jocor, noisy_train, batches, remember, lr, config);
        teacher_epoch(run.coteaching, noisy_train, batches, remember, lr, config);

        // Consensus is the per-batch synchronization point of the two modules.
        SelectionSet epoch_clean({}, SelectionScope::epoch);
        std::vector<const BatchRecord*> records;
        for (std::size_t b = 0; b < run.jocor.epoch_selections.size(); ++b) {
            const BatchRecord& f = run.jocor.epoch_selections[b];
            const BatchRecord& g = run.coteaching.epoch_selections[b];
            records.push_back(&f);
            records.push_back(&g);
            BatchConsensus c{epoch, b, f.selected_by_net1, f.selected_by_net2, g.selected_by_net1, g.selected_by_net2,
                             {}, {}, {}};
            c.ip = inner_consensus(c.p1, c.p2);
            c.iq = inner_consensus(c.q1, c.q2);
            c.icon = outer_consensus(c.ip, c.iq);
            if (!c.icon.is_subset_of(c.p1) || !c.icon.is_subset_of(c.p2) || !c.icon.is_subset_of(c.q1) ||
                !c.icon.is_subset_of(c.q2))
                throw std::logic_error("consensus set escaped one of its component selections");
            if (monitor.on_batch) monitor.on_batch(c);
            epoch_clean = set_union(epoch_clean, c.icon.with_scope(SelectionScope::epoch));
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.remember_rate = remember;
        m.lr = lr;
        m.clean_set_size = epoch_clean.size();
        m.mean_selected_loss = mean_selected(records);
        m.noisy_label_precision = precision_of(epoch_clean, monitor, noisy_train.size());
        if (monitor.test) m.test_accuracy = evaluate(run.jocor.net1.params, *monitor.test);
        run.epochs.push_back(m);
        if (epoch + 1 == config.total_epochs) run.clean_set = epoch_clean.with_scope(SelectionScope::final);
    }
    if (run.clean_set.empty())
        throw TrainingError("consensus clean set is empty; lower the noise rate or train for more epochs");
    return run;
}

ModuleRun train_module(TeacherKind kind, const TrainConfig& config, const LabeledDataset& noisy_train,
                       const LabeledDataset& clean_val, const Monitor& monitor) {
    check_training_inputs(config, noisy_train);
    ModuleRun run;
    run.state = TeacherState::create(kind, noisy_train.dim(), noisy_train.num_classes, config);
    run.best_net1 = run.state.net1.params;
    run.best_val_accuracy = -1.0;
    Rng shuffle(mix_seed(config.seed, streams::teacher_shuffle));

    for (int epoch = 0; epoch < config.total_epochs; ++epoch) {
        const double remember = remember_rate(epoch, config.num_gradual_T, config.noise_rate_tau);
        const double lr = lr_at(epoch, config);
        const auto batches = make_batches(noisy_train.size(), config.batch_size, shuffle);
        teacher_epoch(run.state, noisy_train, batches, remember, lr, config);

        SelectionSet epoch_clean({}, SelectionScope::epoch);
        std::vector<const BatchRecord*> records;
        for (const BatchRecord& r : run.state.epoch_selections) {
            records.push_back(&r);
            epoch_clean = set_union(epoch_clean,
                                    inner_consensus(r.selected_by_net1, r.selected_by_net2).with_scope(SelectionScope::epoch));
        }
        const double val_acc = evaluate(run.state.net1.params, clean_val);
        if (val_acc > run.best_val_accuracy) {
            run.best_val_accuracy = val_acc;
            run.best_epoch = epoch;
            run.best_net1 = run.state.net1.params;
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.remember_rate = remember;
        m.lr = lr;
        m.clean_set_size = epoch_clean.size();
        m.mean_selected_loss = mean_selected(records);
        m.noisy_label_precision = precision_of(epoch_clean, monitor, noisy_train.size());
        if (monitor.test) m.test_accuracy = evaluate(run.state.net1.params, *monitor.test);
        run.epochs.push_back(m);
        if (epoch + 1 == config.total_epochs) run.clean_set = epoch_clean.with_scope(SelectionScope::final);
    }
    return run;
}

StudentRun train_student(const LabeledDataset& train, const SelectionSet& clean_set, const LabeledDataset& clean_val,
                         const TrainConfig& config, const Monitor& monitor) {
    check_training_inputs(config, train);
    if (clean_set.empty()) throw ArgumentError("train_student: clean set is empty");
    if (clean_set.indices().back() >= train.size()) throw ArgumentError("train_student: clean index out of range");
    const LabeledDataset subset = train.subset(clean_set.indices());

    Rng init(mix_seed(config.seed, streams::student_init));
    Rng shuffle(mix_seed(config.seed, streams::student_shuffle));
    Network net = make_network(layer_dims_for(train.dim(), train.num_classes, config.hidden_dims), init, config.adam);

    StudentRun run;
    run.params = net.params;
    run.best_val_accuracy = -1.0;
    for (int epoch = 0; epoch < config.total_epochs; ++epoch) {
        const double lr = lr_at(epoch, config);
        double loss_sum = 0.0;
        for (const Batch& batch : make_batches(subset.size(), config.batch_size, shuffle)) {
            const RowMatrix x = gather(subset.features, batch);
            auto loss = [&](std::size_t r, std::span<const double> probs, std::span<double> dprobs) {
                const int y = subset.labels[batch[r]];
                per_sample_ce_grad(probs, y, dprobs);
                return per_sample_ce(probs, y);
            };
            GradientResult g = gradient(net.params, x, loss);
            loss_sum += g.mean_loss * static_cast<double>(batch.size());
            adam_step(net.params, net.optimizer, g.grads, lr);
        }
        const double val_acc = evaluate(net.params, clean_val);
        if (val_acc > run.best_val_accuracy) {
            run.best_val_accuracy = val_acc;
            run.best_epoch = epoch;
            run.params = net.params;
        }
        EpochMetrics m;
        m.epoch = epoch;
        m.lr = lr;
        m.clean_set_size = subset.size();
        m.mean_selected_loss = loss_sum / static_cast<double>(subset.size());
        if (monitor.test) m.test_accuracy = evaluate(net.params, *monitor.test);
        run.epochs.push_back(m);
    }
    run.final_network = std::move(net);
    run.final_shuffle = shuffle;
    return run;
}

}  // namespace jocot
