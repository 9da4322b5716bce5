from .branches import EXIT, split_critical_edges, demarcate_branches, check_arm_totality, transform, count_arms

__all__ = ["EXIT", "split_critical_edges", "demarcate_branches", "check_arm_totality", "transform", "count_arms"]
