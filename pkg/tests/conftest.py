import pytest

from codedcache import kernels


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param
