"""
Features.py

Created: 09/21/26
Last Modified: 10/09/26

Description: Turns the entries of a manifest into network inputs. Each clip
is decoded and passed through the mel frontend; clips may be processed by a
thread pool, but results always come back in manifest order.
"""
# Library Imports.
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# Custom Imports.
from SceneWise.Errors.Errors import DataError, SceneWiseError
from SceneWise.Frontend.WavIO import readWav


def _extractOne(frontend, path):
    try:
        return frontend.computeMel(readWav(path)).values.astype(np.float32), None
    except (SceneWiseError, OSError, RuntimeError) as e:
        return None, str(e)


def extractFeatures(manifest, frontend, workers=1, skipFailures=False):
    """
    Computes the log-mel input of every manifest entry.

    Parameters
    ----------
    manifest: Manifest
        Entries to process.
    frontend: MelFrontend
        Shared frontend.
    workers: int
        Threads to use.
    skipFailures: bool
        Collect unreadable entries instead of raising.

    Returns
    -------
    tuple: (list of (mel bins, frames) float32 arrays, None where an entry
    failed; list of (entry index, message) failures).
    """
    paths = [manifest.resolvePath(entry) for entry in manifest.entries]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda path: _extractOne(frontend, path), paths))
    else:
        results = [_extractOne(frontend, path) for path in paths]

    features = []
    failures = []
    for index, (values, message) in enumerate(results):
        if message is not None:
            if not skipFailures:
                raise DataError(
                    "Cannot compute features of " + manifest.entries[index].filename + ": " + message
                )
            failures.append((index, message))
        features.append(values)
    return features, failures


def stackFeatures(features):
    """
    Stacks per-clip features into a (N, 1, mel bins, frames) batch.
    Raises DataError if the clips do not share one shape.
    """
    shapes = {values.shape for values in features}
    if len(shapes) != 1:
        raise DataError(
            "Training clips must share one feature shape; found " + ", ".join(sorted(str(s) for s in shapes)) + "."
        )
    return np.stack(features)[:, None, :, :]
