vars pc, a, r;
init pc = 0 && a = 0 && r = 1;
next (pc = 0 && pc' = 1 && a' >= -2 && a' <= 2 && r' = r) || (pc = 1 && (pc' = 1 || pc' = 0) && a' = a && r' = 0) || (pc != 0 && pc != 1 && pc' = pc && a' = a && r' = r);
