"""
Pytest configuration file with shared fixtures
"""

import pytest

from app.agent.views import ActionSpaceConfig, PpoConfig
from app.datasetgen.generator import generate
from app.datasetgen.templates import select_templates
from app.embedding.views import EmbeddingConfig
from app.env.backends import SimBackend
from app.env.environment import Environment
from app.loop_ir.nests import load_program
from app.run_config import RunConfig


DOT_PRODUCT = """\
#define N 1024
float a[N], b[N];

float dot(void)
{
    float s = 0;
    for (int i = 0; i < N; i++) {
        s += a[i] * b[i];
    }
    return s;
}
"""

MATMUL = """\
#define M 16
#define N 64
double A[M][N], B[N][N], C[M][N];

void matmul(void)
{
    int i, j, k;
    for (i = 0; i < M; i++)
        for (j = 0; j < N; j++)
            for (k = 0; k < N; k++)
                C[i][j] += A[i][k] * B[k][j];
}
"""

TWO_LOOPS = """\
void two(int *a, int *b, short *c, int n)
{
    for (int i = 0; i < n; i++)
        a[i] = b[i] + 1;
    int j = 0;
    while (j < n) {
        c[j] = (short) a[j];
        j++;
    }
}
"""

STRIDED = """\
#define N 512
long x[N], y[2 * N];

void gather(void)
{
    for (int i = 0; i < N; i++)
        x[i] = y[2 * i] - 3;
}
"""

ONE_LINE = "void f(float *a, int n) { for (int i = 0; i < n; i++) a[i] = a[i] * 2.0f; }\n"


@pytest.fixture
def dot_source():
    """Dot product over float arrays: one reduction loop"""
    return DOT_PRODUCT


@pytest.fixture
def matmul_source():
    return MATMUL


@pytest.fixture
def two_loops_source():
    return TWO_LOOPS


@pytest.fixture
def dot_nest(dot_source):
    _, nests = load_program(dot_source, file="dot.c")
    return nests[0]


@pytest.fixture
def matmul_nest(matmul_source):
    _, nests = load_program(matmul_source, file="matmul.c")
    return nests[0]


@pytest.fixture
def strided_nest():
    _, nests = load_program(STRIDED, file="strided.c")
    return nests[0]


@pytest.fixture
def small_embedding():
    """Embedding sized for fast tests"""
    return EmbeddingConfig(d_tok=8, d_path=8, dim=16, path_buckets=97, max_contexts=64)


@pytest.fixture
def small_ppo():
    return PpoConfig(lr=1e-2, batch_size=16, epochs_per_batch=2, hidden=(16,), seed=0)


@pytest.fixture
def small_space():
    return ActionSpaceConfig(max_vf=4, max_if=2)


@pytest.fixture
def sim_env():
    """Simulated environment with an in-memory cache"""
    return Environment(SimBackend())


@pytest.fixture
def small_config(small_embedding, small_ppo):
    """Run configuration for quick end-to-end runs on the simulator"""
    config = RunConfig(seed=0, train_steps=32, embedding=small_embedding, ppo=small_ppo)
    return config.model_copy(
        update={
            "supervised": config.supervised.model_copy(update={"hidden": (8,), "epochs": 5}),
            "baselines": config.baselines.model_copy(update={"k": 3, "tree_max_depth": 4}),
        }
    )


@pytest.fixture
def tiny_corpus(tmp_path):
    """Twelve generated programs, one per template, under tmp_path/corpus"""
    out = tmp_path / "corpus"
    manifest = generate(select_templates(), 12, 3, out, train_fraction=0.75, reps=1)
    return out, manifest
