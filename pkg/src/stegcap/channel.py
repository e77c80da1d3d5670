"""Channel kernels: finite DMCs with lazy block extension, additive Gaussian
noise, deterministic attack maps, and the (W, g, A) stego-channel triple."""

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .exceptions import ValidationError
from .validation import DEFAULT_BUDGET, check_block, check_block_length, check_budget, check_stochastic_matrix


def as_rng(seed):
    """Accept an int seed, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_rngs(seed, k):
    """``k`` independent streams derived from one master seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(k)]


class DMC:
    """Discrete memoryless channel W(y|x) as a row-stochastic matrix.

    Rows are indexed by ``input_alphabet``, columns by ``output_alphabet``;
    both default to ``0..K-1``.
    """

    def __init__(self, matrix, input_alphabet=None, output_alphabet=None):
        w = check_stochastic_matrix(matrix).copy()
        w.setflags(write=False)
        self.matrix = w
        self.input_alphabet = tuple(range(w.shape[0])) if input_alphabet is None else tuple(input_alphabet)
        self.output_alphabet = tuple(range(w.shape[1])) if output_alphabet is None else tuple(output_alphabet)
        if len(self.input_alphabet) != w.shape[0] or len(self.output_alphabet) != w.shape[1]:
            raise ValidationError("alphabet sizes do not match the matrix shape")
        if len(set(self.input_alphabet)) != w.shape[0] or len(set(self.output_alphabet)) != w.shape[1]:
            raise ValidationError("alphabet letters must be distinct")
        self._in = {a: i for i, a in enumerate(self.input_alphabet)}
        self._out = {a: i for i, a in enumerate(self.output_alphabet)}

    def __repr__(self):
        return f"DMC({self.matrix.tolist()!r})"

    def __eq__(self, other):
        return (
            isinstance(other, DMC)
            and self.input_alphabet == other.input_alphabet
            and self.output_alphabet == other.output_alphabet
            and np.array_equal(self.matrix, other.matrix)
        )

    __hash__ = None

    @property
    def input_size(self):
        return self.matrix.shape[0]

    @property
    def output_size(self):
        return self.matrix.shape[1]

    def input_index(self, x):
        try:
            return self._in[x]
        except KeyError:
            raise ValidationError(f"{x!r} is not an input letter") from None

    def output_index(self, y):
        try:
            return self._out[y]
        except KeyError:
            raise ValidationError(f"{y!r} is not an output letter") from None

    def prob(self, y, x):
        return float(self.matrix[self.input_index(x), self.output_index(y)])

    def is_deterministic(self):
        return bool(np.all((self.matrix == 0) | (self.matrix == 1)))

    @classmethod
    def identity(cls, alphabet):
        alphabet = tuple(range(alphabet)) if isinstance(alphabet, int) else tuple(alphabet)
        return cls(np.eye(len(alphabet)), alphabet, alphabet)

    @classmethod
    def bsc(cls, p):
        if not 0 <= p <= 1:
            raise ValidationError(f"crossover must lie in [0, 1], got {p!r}")
        return cls([[1 - p, p], [p, 1 - p]])

    @classmethod
    def from_map(cls, fn, input_alphabet, output_alphabet=None):
        """Deterministic kernel sending each x to ``fn(x)`` with probability 1."""
        input_alphabet = tuple(input_alphabet)
        output_alphabet = input_alphabet if output_alphabet is None else tuple(output_alphabet)
        index = {a: j for j, a in enumerate(output_alphabet)}
        w = np.zeros((len(input_alphabet), len(output_alphabet)))
        for i, x in enumerate(input_alphabet):
            y = fn(x)
            if y not in index:
                raise ValidationError(f"map sends {x!r} to {y!r}, outside the output alphabet")
            w[i, index[y]] = 1.0
        return cls(w, input_alphabet, output_alphabet)


class GaussianChannel:
    """Additive white Gaussian noise with the given per-letter variance.

    ``variance == 0`` is the noiseless identity on the real line.
    """

    def __init__(self, variance):
        if not variance >= 0 or not math.isfinite(variance):
            raise ValidationError(f"noise variance must be finite and >= 0, got {variance!r}")
        self.variance = float(variance)

    def __repr__(self):
        return f"GaussianChannel(variance={self.variance!r})"

    def __eq__(self, other):
        return isinstance(other, GaussianChannel) and self.variance == other.variance

    __hash__ = None

    def log_density(self, y, x):
        """Natural log of the block transition density W^n(y|x)."""
        if self.variance == 0:
            raise ValidationError("noiseless Gaussian kernel has no density")
        d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        n = d.shape[-1]
        return -0.5 * n * math.log(2 * math.pi * self.variance) - (d * d).sum(axis=-1) / (2 * self.variance)


class BlockKernel:
    """n-fold memoryless extension W^n(y|x) = prod_i W(y_i|x_i), evaluated lazily.

    Nothing of size |X|^n x |Y|^n exists until :meth:`materialize` is called.
    """

    def __init__(self, kernel, n):
        self.kernel = kernel
        self.n = check_block_length(n)

    def __repr__(self):
        return f"BlockKernel({self.kernel!r}, n={self.n})"

    def prob(self, y, x):
        w = self.kernel
        x = check_block(x, w.input_alphabet)
        y = check_block(y, w.output_alphabet)
        if len(x) != self.n or len(y) != self.n:
            raise ValidationError(f"blocks must have length {self.n}")
        p = 1.0
        for xi, yi in zip(x, y):
            p *= w.matrix[w._in[xi], w._out[yi]]
        return p

    def input_blocks(self):
        return itertools.product(self.kernel.input_alphabet, repeat=self.n)

    def output_blocks(self):
        return itertools.product(self.kernel.output_alphabet, repeat=self.n)

    def row(self, x, budget=DEFAULT_BUDGET):
        """W^n(.|x) over all output blocks, in lexicographic order."""
        w = self.kernel
        check_budget(w.output_size ** self.n, budget, "output blocks")
        x = check_block(x, w.input_alphabet)
        if len(x) != self.n:
            raise ValidationError(f"blocks must have length {self.n}")
        return reduce(np.kron, (w.matrix[w._in[a]] for a in x))

    def rows(self, xs, budget=DEFAULT_BUDGET):
        """Stack of :meth:`row` for several input blocks."""
        check_budget(len(xs) * self.kernel.output_size ** self.n, budget, "kernel entries")
        return np.array([self.row(x, budget) for x in xs])

    def materialize(self, budget=DEFAULT_BUDGET):
        """The full |X|^n x |Y|^n block matrix (inputs and outputs lexicographic)."""
        w = self.kernel.matrix
        check_budget(w.shape[0] ** self.n * w.shape[1] ** self.n, budget, "kernel entries")
        return reduce(np.kron, [w] * self.n)


def product_extend(w, n):
    return BlockKernel(w, n)


def compose_kernels(w, a):
    """Kernel of ``w`` followed by ``a``: Q(z|x) = sum_y a(z|y) w(y|x).

    ``None`` stands for the identity / passive stage.
    """
    if a is None:
        return w
    if w is None:
        return a
    if isinstance(w, BlockKernel) or isinstance(a, BlockKernel):
        if not (isinstance(w, BlockKernel) and isinstance(a, BlockKernel)) or w.n != a.n:
            raise ValidationError("block kernels compose only with block kernels of the same length")
        return BlockKernel(compose_kernels(w.kernel, a.kernel), w.n)
    if isinstance(w, GaussianChannel) and isinstance(a, GaussianChannel):
        return GaussianChannel(w.variance + a.variance)
    if isinstance(w, DMC) and isinstance(a, DMC):
        if w.output_alphabet != a.input_alphabet:
            raise ValidationError(
                f"alphabet mismatch: {w.output_alphabet!r} feeds a kernel expecting {a.input_alphabet!r}"
            )
        q = w.matrix @ a.matrix
        # product rows drift by a few ulps; renormalise to keep them inside the row-sum check
        q = q / q.sum(axis=1, keepdims=True)
        return DMC(q, w.input_alphabet, a.output_alphabet)
    raise ValidationError(f"cannot compose {type(w).__name__} with {type(a).__name__}")


def negation_attack(alphabet=(-1, 1)):
    """Deterministic attack y -> -y, letter by letter."""
    alphabet = tuple(alphabet)
    if set(-a for a in alphabet) != set(alphabet):
        raise ValidationError(f"alphabet {alphabet!r} is not closed under negation")
    return DMC.from_map(lambda y: -y, alphabet)


def sample(kernel, x, seed=None):
    """Draw one output block from ``kernel`` given input block ``x``."""
    rng = as_rng(seed)
    if kernel is None:
        return tuple(x) if not isinstance(x, np.ndarray) else x.copy()
    if isinstance(kernel, BlockKernel):
        kernel = kernel.kernel
    if isinstance(kernel, GaussianChannel):
        x = np.asarray(x, dtype=float)
        if kernel.variance == 0:
            return x.copy()
        return x + rng.normal(0.0, math.sqrt(kernel.variance), size=x.shape)
    if isinstance(kernel, DMC):
        x = check_block(x, kernel.input_alphabet)
        idx = np.array([kernel._in[a] for a in x])
        cdf = np.cumsum(kernel.matrix[idx], axis=1)
        u = rng.random(len(idx))[:, None]
        out = np.minimum((u >= cdf).sum(axis=1), kernel.output_size - 1)
        return tuple(kernel.output_alphabet[j] for j in out)
    raise ValidationError(f"cannot sample from {type(kernel).__name__}")


def load_dmc(text):
    """Parse a DMC from plain-text rows of probabilities (``#`` comments allowed)."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            try:
                rows.append([float(v) for v in line.replace(",", " ").split()])
            except ValueError:
                raise ValidationError(f"bad kernel row {line!r}") from None
    if len({len(r) for r in rows}) != 1:
        raise ValidationError("kernel rows have unequal lengths")
    return DMC(rows)


def kernel_from_spec(text):
    """Command-line kernel spec: ``bsc:0.1``, ``identity:3``, ``gaussian:1.5``,
    ``file:path`` (plain-text rows) or ``none``."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name in ("none", "identity") and not arg:
            return None
        if name == "bsc":
            return DMC.bsc(float(arg))
        if name == "identity":
            return DMC.identity(int(arg))
        if name == "gaussian":
            return GaussianChannel(float(arg))
        if name == "negation":
            return negation_attack()
    except ValueError:
        raise ValidationError(f"bad kernel parameter in {text!r}") from None
    if name == "file":
        with open(arg) as fh:
            return load_dmc(fh.read())
    raise ValidationError(f"unknown kernel spec {text!r}")


@dataclass(frozen=True)
class StegoChannel:
    """The triple (W, g, A): encoder noise, steganalyzer, attack channel.

    ``None`` for either kernel means noiseless / passive.
    """

    encoder_noise: object
    steganalyzer: object
    attack: object = None

    def __post_init__(self):
        w, g, a = self.encoder_noise, self.steganalyzer, self.attack
        if isinstance(w, DMC):
            if g.letters is not None and set(w.output_alphabet) != set(g.letters):
                raise ValidationError("encoder-noise output alphabet differs from the steganalyzer alphabet")
            if isinstance(a, DMC) and w.output_alphabet != a.input_alphabet:
                raise ValidationError("attack input alphabet differs from the encoder-noise output alphabet")
        if isinstance(w, GaussianChannel) and g.letters is not None:
            raise ValidationError("Gaussian encoder noise needs a steganalyzer over the real line")

    @property
    def main_channel(self):
        """Q = A o W, the end-to-end kernel seen by the decoder."""
        return compose_kernels(self.encoder_noise, self.attack)
