from .autodiff import DiffArray, ComputeGraph, OpRecord, backward, no_grad, active_graph
from .ops import (forward_primitive, PRIMITIVES, add, add_bias, mul, scale, mask_multiply, dropout, sum_all, relu, matmul,
                  batched_matmul, transpose, reshape, softmax, layer_norm, embedding, cross_entropy)
from .grad_check import grad_check

__all__ = ['forward_primitive', 'PRIMITIVES', 'DiffArray', 'ComputeGraph', 'OpRecord', 'backward', 'no_grad', 'active_graph',
           'add', 'add_bias', 'mul', 'scale', 'mask_multiply', 'dropout', 'sum_all', 'relu',
           'matmul', 'batched_matmul', 'transpose', 'reshape', 'softmax', 'layer_norm',
           'embedding', 'cross_entropy', 'grad_check']
