""" Ranking documents with segmented queries: dual query representation,
relevance features, a linear combiner and NDCG. """
