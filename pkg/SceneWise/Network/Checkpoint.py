"""
Checkpoint.py

Created: 09/12/26
Last Modified: 10/13/26

Description: Storage precision conversion and the binary checkpoint format.

Layout (little-endian):

    magic          4 bytes   b"ASC1"
    version        u32       1
    precision      u8        0 = fp32, 1 = fp16
    tensor count   u32
    per tensor:
        name length  u16, then the UTF-8 name "<layer name>.<tensor>"
        dtype        u8        0 = float32, 1 = float16
        rank         u8
        dims         u32 x rank
        payload      raw values, C order

fp16 stores round to nearest even; values beyond the binary16 range saturate
to +/-65504 and are counted in a warning.
"""
# Library Imports.
import struct

import numpy as np

# Custom Imports.
from SceneWise.Config.Logger import getLogger
from SceneWise.Errors.Errors import CheckpointError
from SceneWise.Network.Model import ParameterStore

logger = getLogger("network")

MAGIC = b"ASC1"
VERSION = 1

# Precision tag <-> file code.
PRECISION_CODES = {"fp32": 0, "fp16": 1}

# Stored dtype <-> file code.
DTYPE_CODES = {np.dtype("<f4"): 0, np.dtype("<f2"): 1}

# Largest finite binary16 value.
FP16_MAX = float(np.finfo(np.float16).max)


def quantizeStore(store, precision):
    """
    Converts a store to its storage precision.

    Parameters
    ----------
    store: ParameterStore
        Working-precision tensors.
    precision: String
        "fp32" or "fp16".

    Returns
    -------
    ParameterStore: new store holding float32 or float16 tensors.
    """
    if precision not in PRECISION_CODES:
        raise CheckpointError("Unsupported storage precision '" + str(precision) + "'.")

    saturated = 0
    tensors = {}
    for index, layer in store.tensors.items():
        tensors[index] = {}
        for name, value in layer.items():
            if precision == "fp16":
                overflow = np.abs(value) > FP16_MAX
                count = int(np.count_nonzero(overflow))
                if count:
                    saturated += count
                    value = np.clip(value, -FP16_MAX, FP16_MAX)
                tensors[index][name] = value.astype(np.float16)
            else:
                tensors[index][name] = value.astype(np.float32)

    if saturated:
        logger.warning(
            "%d parameter values exceeded the fp16 range and were saturated.", saturated
        )
    return ParameterStore(tensors, precision, dict(store.learnable))


def dequantizeLoad(store):
    """
    Widens a stored ParameterStore to float32 working precision. The precision
    tag is kept so the store remembers where its values came from.
    """
    tensors = {
        index: {name: value.astype(np.float32) for name, value in layer.items()}
        for index, layer in store.tensors.items()
    }
    return ParameterStore(tensors, store.precision, dict(store.learnable))


def encodeCheckpoint(model, store, precision):
    """
    Returns
    -------
    bytes: checkpoint image of the store quantized to the given precision.
    """
    stored = quantizeStore(store, precision)
    names = model.getTensorNames()

    chunks = [MAGIC, struct.pack("<IBI", VERSION, PRECISION_CODES[precision], len(names))]
    for index, fullName in names:
        tensorName = fullName.rsplit(".", 1)[1]
        value = np.ascontiguousarray(stored.getTensor(index, tensorName))
        value = value.astype(value.dtype.newbyteorder("<"), copy=False)
        encodedName = fullName.encode("utf-8")
        chunks.append(struct.pack("<H", len(encodedName)))
        chunks.append(encodedName)
        chunks.append(struct.pack("<BB", DTYPE_CODES[value.dtype], value.ndim))
        chunks.append(struct.pack("<" + "I" * value.ndim, *value.shape))
        chunks.append(value.tobytes())
    return b"".join(chunks)


def readCheckpoint(path):
    """
    Reads a checkpoint file without interpreting it against a graph.

    Returns
    -------
    tuple: (precision tag, dict of tensor name -> np.ndarray at stored dtype).
    Raises CheckpointError naming the file for any malformed content.
    """
    try:
        with open(path, "rb") as checkpointFile:
            data = checkpointFile.read()
    except OSError as e:
        raise CheckpointError("Cannot read checkpoint " + str(path) + ": " + str(e))

    def fail(message):
        raise CheckpointError("Checkpoint " + str(path) + ": " + message)

    if data[:4] != MAGIC:
        fail("bad magic " + repr(data[:4]) + ", expected " + repr(MAGIC) + ".")

    codesToDtype = {code: dtype for dtype, code in DTYPE_CODES.items()}
    codesToPrecision = {code: name for name, code in PRECISION_CODES.items()}
    tensors = {}
    try:
        version, precisionCode, count = struct.unpack_from("<IBI", data, 4)
        if version != VERSION:
            fail("unsupported format version " + str(version) + ".")
        if precisionCode not in codesToPrecision:
            fail("unknown precision code " + str(precisionCode) + ".")
        offset = 4 + struct.calcsize("<IBI")

        for _ in range(count):
            (nameLength,) = struct.unpack_from("<H", data, offset)
            offset += 2
            if offset + nameLength > len(data):
                fail("truncated tensor name.")
            name = data[offset : offset + nameLength].decode("utf-8")
            offset += nameLength
            dtypeCode, rank = struct.unpack_from("<BB", data, offset)
            offset += 2
            if dtypeCode not in codesToDtype:
                fail("tensor '" + name + "' has unknown dtype code " + str(dtypeCode) + ".")
            dims = struct.unpack_from("<" + "I" * rank, data, offset)
            offset += 4 * rank
            dtype = codesToDtype[dtypeCode]
            size = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
            if offset + size > len(data):
                fail("tensor '" + name + "' payload is truncated.")
            values = np.frombuffer(
                data, dtype=dtype, count=size // dtype.itemsize, offset=offset
            )
            tensors[name] = values.reshape(dims).copy()
            offset += size
    except struct.error:
        fail("file is truncated.")
    except UnicodeDecodeError:
        fail("tensor name is not valid UTF-8.")

    if offset != len(data):
        fail(str(len(data) - offset) + " trailing bytes after the last tensor.")
    return codesToPrecision[precisionCode], tensors


def saveCheckpoint(path, model, store, precision="fp16"):
    """
    Writes a store to a checkpoint file at the given storage precision.
    """
    data = encodeCheckpoint(model, store, precision)
    try:
        with open(path, "wb") as checkpointFile:
            checkpointFile.write(data)
    except OSError as e:
        raise CheckpointError("Cannot write checkpoint " + str(path) + ": " + str(e))


def loadCheckpoint(path, model, widen=True):
    """
    Loads a checkpoint written for the given model.

    Parameters
    ----------
    path: String
        Checkpoint file.
    model: Model
        Model whose graph the checkpoint must match tensor for tensor.
    widen: bool
        Return float32 working tensors (True) or the stored dtype (False).

    Returns
    -------
    ParameterStore: tensors keyed by layer index, tagged with the file's
    precision.
    """
    precision, raw = readCheckpoint(path)
    expected = model.initParams(np.random.default_rng(0))

    tensors = {}
    for index, fullName in model.getTensorNames():
        tensorName = fullName.rsplit(".", 1)[1]
        if fullName not in raw:
            raise CheckpointError(
                "Checkpoint " + str(path) + " is missing tensor '" + fullName + "'."
            )
        value = raw.pop(fullName)
        shape = expected.getTensor(index, tensorName).shape
        if value.shape != shape:
            raise CheckpointError(
                "Checkpoint "
                + str(path)
                + ": tensor '"
                + fullName
                + "' has shape "
                + str(value.shape)
                + ", graph expects "
                + str(shape)
                + "."
            )
        tensors.setdefault(index, {})[tensorName] = value

    if raw:
        raise CheckpointError(
            "Checkpoint "
            + str(path)
            + " holds tensors the graph does not know: "
            + ", ".join(sorted(raw))
            + "."
        )

    store = ParameterStore(tensors, precision, dict(expected.learnable))
    return dequantizeLoad(store) if widen else store
