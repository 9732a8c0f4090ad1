"""Best-arm identification in graphical bilinear bandits."""
from .arms import EdgeArmSet, NodeArmSet, lift, random_unit_arms, soare_arm_set
from .design import DesignDistribution, DesignReport, frank_wolfe_design, h_value, product_distribution
from .environment import BilinearParameter, NoiseModel, soare_parameter
from .graphs import Graph, make_circle, make_complete, make_graph, make_matching, make_star

__version__ = "0.1.0"
