import base64
from typing import Dict, List

import numpy as np
from pydantic import BaseModel, Field

from app.errors import SchemaError
from app.nn.constants import DTYPE

_WIRE_DTYPE = np.dtype("<f8")


class EncodedArray(BaseModel):
    """Bit-exact float64 array: little-endian bytes in base64 plus the shape."""
    shape: List[int] = Field(..., description="Array shape")
    data: str = Field(..., description="Base64 of the little-endian float64 buffer")


def encode_array(array: np.ndarray) -> EncodedArray:
    array = np.ascontiguousarray(array, dtype=_WIRE_DTYPE)
    return EncodedArray(shape=list(array.shape), data=base64.b64encode(array.tobytes()).decode("ascii"))


def decode_array(encoded: EncodedArray) -> np.ndarray:
    try:
        raw = base64.b64decode(encoded.data.encode("ascii"), validate=True)
    except ValueError as e:
        raise SchemaError(detail=f"Array payload is not valid base64: {e}")
    expected = int(np.prod(encoded.shape, dtype=np.int64)) * _WIRE_DTYPE.itemsize
    if len(raw) != expected:
        raise SchemaError(
            detail=f"Array payload has {len(raw)} bytes, shape {encoded.shape} needs {expected}"
        )
    return np.frombuffer(raw, dtype=_WIRE_DTYPE).astype(DTYPE).reshape(encoded.shape)


def encode_params(params: Dict[str, np.ndarray]) -> Dict[str, EncodedArray]:
    return {name: encode_array(value) for name, value in params.items()}


def decode_params(encoded: Dict[str, EncodedArray]) -> Dict[str, np.ndarray]:
    return {name: decode_array(value) for name, value in encoded.items()}
