import pytest

from tasep_pgf.pgf_model import PGFModel


@pytest.fixture(params=["poisson", "bernoulli", "geometric"])
def builtin_model(request):
    return {
        "poisson": PGFModel.continuous_poisson(1.0),
        "bernoulli": PGFModel.bernoulli(0.5),
        "geometric": PGFModel.geometric(0.4),
    }[request.param]
