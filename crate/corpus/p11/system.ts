vars pc, a, r;
init pc = 0 && a = 0 && r = 0;
next (pc = 0 && pc' = 1 && a' = a + 1 && a < 2 && r' = 0) || (pc = 0 && a >= 2 && pc' = 1 && a' = 0 && r' = 0) || (pc = 1 && pc' = 0 && a' = a && (r' = 0 || r' = 1)) || (pc != 0 && pc != 1 && pc' = 0 && a' = a && r' = r);
