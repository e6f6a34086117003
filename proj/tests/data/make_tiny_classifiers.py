"""Writes two tiny ONNX classifiers used by the backend tests.

Both average each RGB channel over the image and apply a fixed linear layer
followed by softmax, so the predicted class follows the dominant colour:
  tiny_mask.onnx: 3 outputs, logit k = 10 * mean(channel k)   (R, G, B)
  tiny_hand.onnx: 2 outputs, logits = 10 * (mean R, mean B)
"""
import sys

import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper


def build(weights: np.ndarray, edge: int, path: str) -> None:
    classes = weights.shape[0]
    nodes = [
        helper.make_node("GlobalAveragePool", ["input"], ["pooled"]),
        helper.make_node("Flatten", ["pooled"], ["flat"], axis=1),
        helper.make_node("Gemm", ["flat", "W", "B"], ["logits"], transB=1),
        helper.make_node("Softmax", ["logits"], ["probs"], axis=1),
    ]
    graph = helper.make_graph(
        nodes,
        "tiny",
        [helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, edge, edge])],
        [helper.make_tensor_value_info("probs", TensorProto.FLOAT, [1, classes])],
        initializer=[
            numpy_helper.from_array(weights.astype(np.float32), "W"),
            numpy_helper.from_array(np.zeros(classes, dtype=np.float32), "B"),
        ],
    )
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 11)])
    model.ir_version = 6
    onnx.checker.check_model(model)
    onnx.save(model, path)


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    build(10.0 * np.eye(3), 224, f"{out}/tiny_mask.onnx")
    build(10.0 * np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]), 224, f"{out}/tiny_hand.onnx")
