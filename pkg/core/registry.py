"""
Registry of per-level expectation backends.

A resolver receives a backend tag and the sample and returns an object with
``expect(stage, u, eta) -> ndarray`` and a ``details`` dict. The built-in
backends register when their module is imported; ``resolve_level`` imports
that module on first use, so library callers need not run ``django.setup()``.
"""
import threading
from importlib import import_module

from .exceptions import BackendUnavailable
from .types import BackendKind

_resolvers = {}
_lock = threading.Lock()

BUILTIN_BACKENDS = {
    BackendKind.EMPIRICAL: ('core.composite', 'EmpiricalLevel'),
    BackendKind.KERNEL: ('smoothing.expectation', 'SmoothedLevel'),
    BackendKind.WAVELET: ('wavelet.density', 'WaveletLevel'),
}


def register_backend(kind, resolver):
    with _lock:
        _resolvers[BackendKind(kind)] = resolver


def registered_kinds():
    return frozenset(_resolvers)


def _builtin_resolver(kind):
    location = BUILTIN_BACKENDS.get(kind)
    if location is None:
        return None
    module, name = location
    level = getattr(import_module(module), name)
    if kind == BackendKind.EMPIRICAL:
        return lambda tag, sample: level(sample)
    return level


def resolve_level(tag, sample):
    resolver = _resolvers.get(tag.kind)
    if resolver is None:
        resolver = _builtin_resolver(tag.kind)
        if resolver is None:
            raise BackendUnavailable(f'no expectation backend registered for {tag.kind}')
        register_backend(tag.kind, resolver)
    return resolver(tag, sample)
