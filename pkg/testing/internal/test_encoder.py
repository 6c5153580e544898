import time
import warnings

import numpy as np
import pytest

from latentsat.encoder import (BackendManager, EncoderBackend, Latent,
                               LatentGrid, check_backend_agreement,
                               encode_batch, encode_grid, encode_tile,
                               register_backend, reparameterize)
from latentsat.exceptions import DimensionError
from latentsat.fixtures import gen_scene, gen_weights, reference_arch
from latentsat.helpers import make_rng
from latentsat.ingest import normalize, tile_scene
from latentsat.model_io import WeightSet, bind


def oracle_forward(model, tile):
    """Position-by-position float64 forward pass."""
    x = tile.astype(np.float64)
    for layer in model.trunk:
        p = layer.spec.params
        if layer.spec.kind == 'conv2d':
            k, s, pad = int(p['kernel']), int(p['stride']), int(p['padding'])
            w = layer.weight.astype(np.float64)
            xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
            oh = (xp.shape[1] - k) // s + 1
            ow = (xp.shape[2] - k) // s + 1
            out = np.empty((w.shape[0], oh, ow))
            for oy in range(oh):
                for ox in range(ow):
                    patch = xp[:, oy * s:oy * s + k, ox * s:ox * s + k]
                    out[:, oy, ox] = (w * patch).sum(axis=(1, 2, 3)) + layer.bias
            x = out
        else:
            x = np.where(x > 0, x, float(p['alpha']) * x)
    flat = x.reshape(-1)
    mu, logvar = model.heads['mu'], model.heads['logvar']
    return (mu.weight.astype(np.float64) @ flat + mu.bias,
            logvar.weight.astype(np.float64) @ flat + logvar.bias)


@pytest.fixture(scope='module')
def tiles():
    return make_rng(7).random((100, 4, 32, 32)).astype(np.float32)


class Test_encode_tile:
    def test_matches_oracle(self, model, tiles):
        latents, _ = encode_batch(tiles, model, 64)
        for tile, lat in zip(tiles, latents):
            mu, logvar = oracle_forward(model, tile)
            np.testing.assert_allclose(lat.mu, mu, rtol=0, atol=1e-5)
            np.testing.assert_allclose(lat.logvar, np.clip(logvar, -20, 20),
                                       rtol=0, atol=1e-5)

    def test_shape_and_dtype(self, model, tiles):
        lat = encode_tile(tiles[0], model)
        assert lat.mu.shape == lat.logvar.shape == (128,)
        assert lat.mu.dtype == np.float32

    def test_repeatable(self, model, tiles):
        assert encode_tile(tiles[3], model) == encode_tile(tiles[3], model)

    def test_wrong_shape(self, model):
        with pytest.raises(DimensionError):
            encode_tile(np.zeros((3, 32, 32), np.float32), model)
        with pytest.raises(DimensionError):
            encode_tile(np.zeros((4, 16, 16), np.float32), model)

    def test_logvar_clamped(self):
        ws = WeightSet([(n, np.full_like(a, 50.0) if n == 'fc_logvar.bias' else a)
                        for n, a in gen_weights(3)])
        big = bind(WeightSet([(n, np.zeros_like(a) if n == 'fc_logvar.weight' else a)
                              for n, a in ws]), reference_arch())
        lat = encode_tile(np.zeros((4, 32, 32), np.float32), big)
        assert (lat.logvar == 20.0).all()


class Test_encode_batch:
    def test_batching_invariance_is_bitwise(self, model, tiles):
        baseline, _ = encode_batch(tiles[:40], model, 1)
        for batch_size in (7, 16, 40, 64):
            latents, _ = encode_batch(tiles[:40], model, batch_size)
            assert latents == baseline

    def test_workers_keep_order(self, model, tiles):
        serial, _ = encode_batch(tiles[:30], model, 10)
        threaded, _ = encode_batch(tiles[:30], model, 10, workers=4)
        assert threaded == serial

    def test_matches_encode_tile(self, model, tiles):
        latents, _ = encode_batch(tiles[:5], model, 2)
        for i, lat in enumerate(latents):
            single = encode_tile(tiles[i], model)
            assert lat.mu.tobytes() == single.mu.tobytes()

    def test_one_timing_per_batch(self, model):
        tiles = np.zeros((225, 4, 32, 32), np.float32)
        latents, timings = encode_batch(tiles, model, 64)
        assert len(latents) == 225
        assert [t.tile_count for t in timings] == [64, 64, 64, 33]
        assert [t.batch_index for t in timings] == [0, 1, 2, 3]
        assert all(t.duration_s >= 0 for t in timings)

    def test_batch_hook_inside_timing(self, model, tiles):
        def hook(batch_index):
            if batch_index == 1:
                time.sleep(0.05)

        _, timings = encode_batch(tiles[:6], model, 2, batch_hook=hook)
        assert timings[1].duration_s >= 0.05

    def test_empty(self, model):
        assert encode_batch([], model, 8) == ([], [])

    def test_bad_batch_size(self, model, tiles):
        with pytest.raises(ValueError):
            encode_batch(tiles[:2], model, 0)

    def test_default_indices(self, model, tiles):
        latents, _ = encode_batch(tiles[:3], model, 2)
        assert [lat.tile_index for lat in latents] == [(0, 0), (1, 0), (2, 0)]


class Test_encode_grid:
    def test_tile_indices_row_major(self, model):
        grid = tile_scene(normalize(gen_scene(5, height=64, width=96)))
        latents, timings = encode_grid(grid, model, 4)
        assert isinstance(latents, LatentGrid)
        assert (latents.rows, latents.cols) == (2, 3)
        assert [lat.tile_index for lat in latents] == \
            [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
        assert [t.tile_count for t in timings] == [4, 2]
        assert latents.mu_matrix().shape == (6, 128)

    def test_grid_size_checked(self):
        with pytest.raises(DimensionError):
            LatentGrid(2, 2, [Latent(np.zeros(4), np.zeros(4))])


class Test_reparameterize:
    def make_latent(self):
        return Latent(np.linspace(-1, 1, 128).astype(np.float32),
                      np.full(128, np.log(4.0), dtype=np.float32))

    def test_seeded(self):
        lat = self.make_latent()
        a = reparameterize(lat, make_rng(3))
        b = reparameterize(lat, make_rng(3))
        assert a.tobytes() == b.tobytes()
        assert a.shape == (128,) and a.dtype == np.float32

    def test_moments(self):
        lat = self.make_latent()
        z = reparameterize(lat, make_rng(11), n=20000)
        assert z.shape == (20000, 128)
        eps = (z.astype(np.float64) - lat.mu) / 2.0
        assert abs(eps.mean()) < 0.01
        assert abs(eps.std() - 1.0) < 0.01

    def test_zero_variance_returns_mu(self):
        lat = Latent(np.ones(128, np.float32), np.full(128, -20.0, np.float32))
        z = reparameterize(lat, make_rng(0), n=4)
        np.testing.assert_allclose(z, 1.0, atol=2e-4)


class Test_backends:
    def test_reference_registered(self):
        assert BackendManager.get_backend('reference') is not None
        assert 'reference' in BackendManager.get_loaded_backends()

    def test_reference_agrees_with_itself(self, model, tiles):
        assert check_backend_agreement(BackendManager.get_backend('reference'),
                                       model, tiles[:4]) == 0.0

    def test_custom_backend(self, model, tiles):
        reference = BackendManager.get_backend('reference')

        @register_backend('jittered')
        class Jittered(EncoderBackend):
            def encode(self, model, tiles):
                mu, logvar = reference.encode(model, tiles)
                return mu + np.float32(5e-5), logvar

        try:
            backend = BackendManager.get_backend('jittered')
            assert backend.name == 'jittered'
            diff = check_backend_agreement(backend, model, tiles[:3])
            assert 0 < diff <= 1e-4
            latents, _ = encode_batch(tiles[:3], model, 2, backend=backend)
            assert len(latents) == 3
        finally:
            assert BackendManager.remove_backend('jittered')

    def test_duplicate_name_warns(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')

            @register_backend('reference')
            class Another(EncoderBackend):
                def encode(self, model, tiles):
                    raise NotImplementedError

        assert any('already exists' in str(w.message) for w in caught)
        assert not isinstance(BackendManager.get_backend('reference'), Another)
