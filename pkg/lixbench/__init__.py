from .common.Dataset import Dataset, load_dataset, save_dataset
from .common.Oracle import SortedOracle, oracle_apply
from .pla.Segmentation import segment_feasible, optimal_pla
from .pla.hardness import hardness_profile, mse_hardness
from .datagen.Generator import GenSpec, generate
from .gapped.GappedIndex import GappedIndex
from .chain.ChainIndex import ChainIndex
from .btree.BPlusTree import BPlusTree
