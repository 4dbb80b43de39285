#include "pdrlab/nn/spec.hpp"

#include "pdrlab/errors.hpp"

namespace pdrlab::nn {

NetworkSpec NetworkSpec::desk_scale(int input_dim) {
    NetworkSpec s;
    s.input_dim = input_dim;
    s.ff_in_dims = {32};
    s.lstm_cells = 32;
    return s;
}

void NetworkSpec::validate() const {
    if (input_dim <= 0) throw ConfigError("NetworkSpec.input_dim must be > 0");
    for (int d : ff_in_dims)
        if (d <= 0) throw ConfigError("NetworkSpec.ff_in_dims entries must be > 0");
    if (lstm_layers <= 0) throw ConfigError("NetworkSpec.lstm_layers must be > 0");
    if (lstm_cells <= 0) throw ConfigError("NetworkSpec.lstm_cells must be > 0");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ConfigError("NetworkSpec.dropout_rate must be in [0, 1)");
    if (ff_out_dims.empty()) throw ConfigError("NetworkSpec.ff_out_dims must not be empty");
    for (int d : ff_out_dims)
        if (d <= 0) throw ConfigError("NetworkSpec.ff_out_dims entries must be > 0");
}

TrainConfig TrainConfig::desk_scale() {
    TrainConfig c;
    c.batch = 32;
    c.max_epochs = 30;
    c.early_stop_patience = 8;
    c.lr0 = 3e-3;
    c.lr_halve_every = 10;
    return c;
}

void TrainConfig::validate() const {
    if (!(lr0 > 0.0)) throw ConfigError("TrainConfig.lr0 must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0) throw ConfigError("TrainConfig.beta1 must be in [0, 1)");
    if (beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("TrainConfig.beta2 must be in [0, 1)");
    if (!(eps > 0.0)) throw ConfigError("TrainConfig.eps must be > 0");
    if (lr_halve_every < 0) throw ConfigError("TrainConfig.lr_halve_every must be >= 0");
    if (!(lr_factor > 0.0) || lr_factor > 1.0) throw ConfigError("TrainConfig.lr_factor must be in (0, 1]");
    if (batch <= 0) throw ConfigError("TrainConfig.batch must be > 0");
    if (max_epochs <= 0) throw ConfigError("TrainConfig.max_epochs must be > 0");
    if (early_stop_patience < 0) throw ConfigError("TrainConfig.early_stop_patience must be >= 0");
    if (l2_weight < 0.0) throw ConfigError("TrainConfig.l2_weight must be >= 0");
    if (grad_clip < 0.0) throw ConfigError("TrainConfig.grad_clip must be >= 0");
    if (workers <= 0) throw ConfigError("TrainConfig.workers must be > 0");
}

}  // namespace pdrlab::nn
