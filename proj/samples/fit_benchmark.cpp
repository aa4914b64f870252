// Fits the 1-D benchmark with a single-layer and a four-layer network and
// prints training/test RMSE for each.

#include "dscn/builder.hpp"
#include "dscn/data.hpp"
#include "dscn/metrics.hpp"

#include <cstdio>

int main()
{
    const auto train = dscn::gen_benchmark(1000, 1);
    const auto test = dscn::gen_benchmark(1000, 2);

    dscn::builder_config shallow;
    shallow.max_nodes_per_layer = {100};
    shallow.t_max = 20;
    shallow.seed = 7;

    dscn::builder_config deep = shallow;
    deep.max_layers = 4;
    deep.max_nodes_per_layer = {25, 25, 25, 25};

    for (const auto* cfg : {&shallow, &deep}) {
        const auto result = dscn::build(train, *cfg);
        const double tr = dscn::rmse(dscn::predict(result.model, train.inputs), train.targets);
        const double te = dscn::rmse(dscn::predict(result.model, test.inputs), test.targets);
        std::printf("%zu layer(s), %zu nodes: train RMSE %.3e, test RMSE %.3e\n",
                    result.model.layers.size(), result.model.node_count(), tr, te);
    }
}
